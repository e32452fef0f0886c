"""On-disk HTTP response cache."""

import asyncio
import hashlib
import json
import shutil
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..utils.logging import get_logger

logger = get_logger(__name__)

MANIFEST = "manifest.json"


class DiskCache:
    """JSON values stored one file per key hash, plus a manifest of the keys.

    Entries never expire. Reads are lock-free; writes are serialized.
    """

    def __init__(self, directory: Union[str, Path], enabled: bool = True):
        self.directory = Path(directory)
        self.enabled = enabled
        self._lock = asyncio.Lock()

    @staticmethod
    def _hash(key: str) -> str:
        return hashlib.sha256(key.encode("utf-8")).hexdigest()

    def _path(self, key: str) -> Path:
        return self.directory / f"{self._hash(key)}.json"

    def _manifest(self) -> Dict[str, str]:
        path = self.directory / MANIFEST
        if not path.exists():
            return {}
        try:
            with open(path, encoding="utf-8") as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning(f"Unreadable cache manifest {path}: {e}")
            return {}

    def _write_manifest(self, manifest: Dict[str, str]) -> None:
        with open(self.directory / MANIFEST, "w", encoding="utf-8") as f:
            json.dump(manifest, f, sort_keys=True, indent=2)

    async def get(self, key: str) -> Optional[Any]:
        """
        Get value from cache.

        Args:
            key: Cache key, typically the full request URL

        Returns:
            Cached value if present, None otherwise
        """
        if not self.enabled:
            return None
        path = self._path(key)
        if not path.exists():
            return None
        try:
            with open(path, encoding="utf-8") as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning(f"Ignoring unreadable cache entry {path.name}: {e}")
            return None

    async def set(self, key: str, value: Any) -> bool:
        """
        Set value in cache.

        Returns:
            bool: True if the value was written
        """
        if not self.enabled:
            return False
        async with self._lock:
            self.directory.mkdir(parents=True, exist_ok=True)
            path = self._path(key)
            tmp = path.with_suffix(".tmp")
            with open(tmp, "w", encoding="utf-8") as f:
                json.dump(value, f, sort_keys=True, ensure_ascii=False)
            tmp.replace(path)
            manifest = self._manifest()
            manifest[self._hash(key)] = key
            self._write_manifest(manifest)
        return True

    async def delete(self, key: str) -> bool:
        async with self._lock:
            path = self._path(key)
            if not path.exists():
                return False
            path.unlink()
            manifest = self._manifest()
            manifest.pop(self._hash(key), None)
            self._write_manifest(manifest)
            return True

    async def exists(self, key: str) -> bool:
        return self._path(key).exists()

    async def clear(self) -> int:
        """Remove every entry. Returns the number of entries removed."""
        async with self._lock:
            count = len(self._manifest())
            if self.directory.exists():
                shutil.rmtree(self.directory)
            return count

    def info(self) -> Dict[str, Any]:
        entries = list(self.directory.glob("*.json")) if self.directory.exists() else []
        entries = [p for p in entries if p.name != MANIFEST]
        return {
            "directory": str(self.directory),
            "entries": len(entries),
            "bytes": sum(p.stat().st_size for p in entries),
        }
