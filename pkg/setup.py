"""Setup file for the SPAR package."""

from setuptools import setup, find_packages

setup(
    name="spar",
    version="0.1.0",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    package_data={"spar": ["templates/prompts/*.txt"]},
    install_requires=[
        "httpx",
        "openai",
        "tenacity",
        "jinja2",
        "pydantic>=2",
        "python-dotenv",
    ],
    extras_require={
        "dev": [
            "pytest",
            "pytest-asyncio",
            "pytest-cov",
            "black",
            "pylint",
            "mypy",
        ],
    },
    entry_points={
        "console_scripts": [
            "spar=spar.cli.main:main",
        ],
    },
    python_requires=">=3.9",
)
