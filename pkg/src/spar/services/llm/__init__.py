"""Prompt templating, completion parsing and the chat-completion gateway."""

from .gateway import Cassette, ChatRequest, ChatTransport, LLMGateway, OpenAIChatTransport
from .templates import PromptId, PromptTemplate, get_template, render

__all__ = [
    "Cassette",
    "ChatRequest",
    "ChatTransport",
    "LLMGateway",
    "OpenAIChatTransport",
    "PromptId",
    "PromptTemplate",
    "get_template",
    "render",
]
