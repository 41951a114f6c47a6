"""Prompt rendering, completion providers, and candidate extraction."""
from .extract import (
    CandidateWp, ExtractionError, FOO_MUTATED, MISSING_PRECONDITION,
    TYPE_ERROR, UNPARSABLE, candidate_from_program, extract_candidate,
    strip_code_fences,
)
from .prompts import (
    FORMAT_REMINDER, GRAMMAR_TEXT, PromptKind, render_initial_prompt,
    render_prompt, render_repair_validity_prompt,
    render_repair_weakness_prompt,
)
from .providers import (
    API_KEY_ENV, API_KEY_OVERRIDE_ENV, ChatExchange, ChatRequest, Divergence,
    HttpProvider, ProviderError, RecordingProvider, ReplayProvider,
    ScriptedProvider, exchange_record, parse_provider_spec, prompt_hash,
    user_message, DEFAULT_BASE_URL, DEFAULT_MODEL,
)

__all__ = [
    "CandidateWp", "ExtractionError", "FOO_MUTATED", "MISSING_PRECONDITION",
    "TYPE_ERROR", "UNPARSABLE", "candidate_from_program", "extract_candidate",
    "strip_code_fences", "FORMAT_REMINDER", "GRAMMAR_TEXT", "PromptKind",
    "render_initial_prompt", "render_prompt", "render_repair_validity_prompt",
    "render_repair_weakness_prompt", "API_KEY_ENV", "API_KEY_OVERRIDE_ENV",
    "ChatExchange", "ChatRequest", "Divergence", "HttpProvider",
    "ProviderError", "RecordingProvider", "ReplayProvider",
    "ScriptedProvider", "exchange_record", "parse_provider_spec",
    "prompt_hash", "user_message", "DEFAULT_BASE_URL", "DEFAULT_MODEL",
]
