"""Prompt templates for the two agent roles.

Templates are plain text files with named placeholders ({outline},
{transcript}, {guidance}, {event_summary}); they live in the package's
prompts/ directory by default and can be overridden with a directory of
files with the same names, so the agents' framing is auditable and
swappable without touching code.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

TEMPLATE_NAMES = ("graph_agent_system", "graph_interpreter", "meta_reviewer")


class PromptTemplates:
    def __init__(self, texts: dict[str, str]):
        missing = [n for n in TEMPLATE_NAMES if n not in texts]
        if missing:
            raise ValueError(f"missing prompt templates: {missing}")
        self._texts = texts

    def render(self, name: str, **fields: str) -> str:
        return self._texts[name].format(**fields)


def load_templates(directory: str | Path | None = None) -> PromptTemplates:
    texts: dict[str, str] = {}
    if directory is not None:
        base = Path(directory)
        for name in TEMPLATE_NAMES:
            texts[name] = (base / f"{name}.txt").read_text(encoding="utf-8")
    else:
        pkg = resources.files("chatgrapht") / "prompts"
        for name in TEMPLATE_NAMES:
            texts[name] = (pkg / f"{name}.txt").read_text(encoding="utf-8")
    return PromptTemplates(texts)
