"""The candidate/repair loop that steers an LLM toward a weakest precondition.

One guidance cycle runs up to ``max_validity_iterations`` rounds of validity
fuzzing (each counterexample triggers a validity-repair prompt), then a
single weakness-fuzz step whose counterexample, if any, triggers a
weakness-repair prompt and the next cycle. The run ends Accepted when a
candidate survives both phases, Malformed when the model output cannot be
extracted (after one re-ask), ExhaustedBudget when iterations or cycles run
out, or FuzzBlind in strict mode when validity fuzzing never saw an adhering
input. Every event and exchange is recorded in an FgTrace; a trace file plus
the same seeds is sufficient to replay the run.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from .fuzzing import (
    Counterexample, FuzzBudget, FuzzInput, FuzzVerdict, GeneratorConfig,
    LikelyPass, default_config, derive_seed, is_vacuous_validity,
    validity_fuzz, weakness_fuzz,
)
from .llm import (
    CandidateWp, ChatExchange, ExtractionError, FORMAT_REMINDER, PromptKind,
    ProviderError, exchange_record, prompt_hash, render_prompt, user_message,
)
from .minilang import DEFAULT_STEP_LIMIT, ProgramAst

DEFAULT_MAX_VALIDITY_ITERATIONS = 10
DEFAULT_MAX_CYCLES = 3


@dataclass(frozen=True)
class FgConfig:
    max_validity_iterations: int = DEFAULT_MAX_VALIDITY_ITERATIONS
    max_cycles: int = DEFAULT_MAX_CYCLES
    fuzz_budget: FuzzBudget = field(default_factory=FuzzBudget)
    generator: GeneratorConfig = field(default_factory=default_config)
    fg_enabled: bool = True
    strict_fuzz_blind: bool = False
    shrink: bool = True
    step_limit: int = DEFAULT_STEP_LIMIT


# --- trace events ---

@dataclass(frozen=True)
class PromptSent:
    kind: PromptKind
    cycle: int
    prompt_hash: str
    retry: bool = False


@dataclass(frozen=True)
class CandidateReceived:
    cycle: int
    precondition_source: str
    comment: str


@dataclass(frozen=True)
class ValidityVerdict:
    cycle: int
    iteration: int
    verdict: str  # "likely-pass" | "counterexample"
    trials: int
    satisfied: int
    step_limited: int
    precond_faults: int
    seed: int
    vacuous: bool
    witness: Optional[FuzzInput] = None


@dataclass(frozen=True)
class WeaknessVerdict:
    cycle: int
    verdict: str
    trials: int
    satisfied: int
    step_limited: int
    precond_faults: int
    seed: int
    witness: Optional[FuzzInput] = None


@dataclass(frozen=True)
class RepairTriggered:
    kind: PromptKind  # REPAIR_VALIDITY or REPAIR_WEAKNESS
    cycle: int
    witness: FuzzInput


@dataclass(frozen=True)
class CycleCompleted:
    cycle: int


@dataclass(frozen=True)
class TerminalOutcome:
    outcome: str  # "accepted" | "exhausted-budget" | "malformed" | "fuzz-blind"
    cycles_used: int
    llm_calls: int
    fg_used: bool


TraceEvent = Union[PromptSent, CandidateReceived, ValidityVerdict,
                   WeaknessVerdict, RepairTriggered, CycleCompleted,
                   TerminalOutcome]


@dataclass
class FgTrace:
    program_id: str
    config: FgConfig
    events: list[TraceEvent] = field(default_factory=list)
    exchanges: list[dict] = field(default_factory=list)  # transcript records
    llm_calls: int = 0
    cycles_used: int = 0

    def add(self, event: TraceEvent) -> None:
        self.events.append(event)

    @property
    def fg_used(self) -> bool:
        return any(isinstance(e, RepairTriggered) for e in self.events)

    @property
    def vacuous_validity_seen(self) -> bool:
        return any(isinstance(e, ValidityVerdict) and e.vacuous
                   for e in self.events)

    def repair_count(self, kind: PromptKind | None = None) -> int:
        return sum(1 for e in self.events
                   if isinstance(e, RepairTriggered)
                   and (kind is None or e.kind is kind))


# --- outcomes ---

@dataclass
class Accepted:
    candidate: CandidateWp
    trace: FgTrace


@dataclass
class ExhaustedBudget:
    best_candidate: Optional[CandidateWp]
    trace: FgTrace


@dataclass
class Malformed:
    reason: str
    trace: FgTrace


@dataclass
class FuzzBlind:
    candidate: CandidateWp
    trace: FgTrace


WpOutcome = Union[Accepted, ExhaustedBudget, Malformed, FuzzBlind]

OUTCOME_NAMES = {
    Accepted: "accepted",
    ExhaustedBudget: "exhausted-budget",
    Malformed: "malformed",
    FuzzBlind: "fuzz-blind",
}


def outcome_name(outcome: WpOutcome) -> str:
    return OUTCOME_NAMES[type(outcome)]


def outcome_candidate(outcome: WpOutcome) -> Optional[CandidateWp]:
    if isinstance(outcome, Accepted):
        return outcome.candidate
    if isinstance(outcome, ExhaustedBudget):
        return outcome.best_candidate
    if isinstance(outcome, FuzzBlind):
        return outcome.candidate
    return None


class _MalformedRun(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


class _Session:
    """Shared plumbing for zero-shot and guided runs."""

    def __init__(self, program: ProgramAst, provider, config: FgConfig,
                 program_id: str):
        self.program = program
        self.provider = provider
        self.config = config
        self.trace = FgTrace(program_id=program_id, config=config)

    def _complete(self, prompt: str, kind: PromptKind) -> ChatExchange:
        messages = user_message(prompt)
        exchange = self.provider.complete(
            messages, program_id=self.trace.program_id, prompt_kind=kind.value)
        self.trace.llm_calls += 1
        self.trace.exchanges.append(
            exchange_record(exchange, self.trace.program_id, kind.value))
        return exchange

    def obtain_candidate(self, kind: PromptKind, cycle: int,
                         source: str,
                         witness: FuzzInput | None = None) -> CandidateWp:
        """Send a prompt and extract the candidate, re-asking once with a
        format reminder before giving up as malformed."""
        from .llm import extract_candidate

        prompt = render_prompt(kind, source, witness)
        self.trace.add(PromptSent(kind, cycle, prompt_hash(user_message(prompt))))
        try:
            exchange = self._complete(prompt, kind)
        except ProviderError as exc:
            if exc.kind == "config":
                raise  # setup problem, not a run outcome
            raise _MalformedRun(f"provider failure: {exc}") from exc
        try:
            candidate = extract_candidate(exchange.response_text, self.program)
        except ExtractionError as first:
            retry_prompt = prompt + "\n\n" + FORMAT_REMINDER
            self.trace.add(PromptSent(kind, cycle,
                                      prompt_hash(user_message(retry_prompt)),
                                      retry=True))
            try:
                exchange = self._complete(retry_prompt, kind)
            except ProviderError as exc:
                if exc.kind == "config":
                    raise
                raise _MalformedRun(f"provider failure: {exc}") from exc
            try:
                candidate = extract_candidate(exchange.response_text, self.program)
            except ExtractionError as second:
                raise _MalformedRun(
                    f"extraction failed twice ({first.kind}, then "
                    f"{second.kind}): {second.detail}") from second
        self.trace.add(CandidateReceived(
            cycle,
            _precondition_source(candidate),
            candidate.comment))
        return candidate


def _precondition_source(candidate: CandidateWp) -> str:
    from .minilang import to_source

    pre = candidate.program.precondition
    return to_source(pre) if pre is not None else ""


def _phase_seed(config: FgConfig, phase: str, cycle: int, iteration: int) -> int:
    return derive_seed(config.generator.seed, phase, cycle, iteration)


def zero_shot(program: ProgramAst, provider, config: FgConfig | None = None,
              program_id: str = "") -> WpOutcome:
    """One initial prompt, no fuzzing: accepted as-is if extractable."""
    config = config or FgConfig(fg_enabled=False)
    session = _Session(program, provider, config, program_id)
    trace = session.trace
    try:
        candidate = session.obtain_candidate(PromptKind.INITIAL_WP, cycle=0,
                                             source=program.source_text)
    except _MalformedRun as exc:
        trace.add(TerminalOutcome("malformed", 0, trace.llm_calls, False))
        return Malformed(exc.reason, trace)
    trace.add(TerminalOutcome("accepted", 0, trace.llm_calls, False))
    return Accepted(candidate, trace)


def fg_generate(program: ProgramAst, provider, config: FgConfig | None = None,
                program_id: str = "") -> WpOutcome:
    """Run the full guidance loop over fuzz-checked repair rounds."""
    config = config or FgConfig()
    if not config.fg_enabled:
        return zero_shot(program, provider, config, program_id)
    session = _Session(program, provider, config, program_id)
    trace = session.trace
    budget = config.fuzz_budget

    def finish(outcome: WpOutcome) -> WpOutcome:
        trace.cycles_used = cycle
        trace.add(TerminalOutcome(outcome_name(outcome), cycle,
                                  trace.llm_calls, trace.fg_used))
        return outcome

    cycle = 0
    try:
        candidate = session.obtain_candidate(PromptKind.INITIAL_WP, cycle=0,
                                             source=program.source_text)
    except _MalformedRun as exc:
        trace.add(TerminalOutcome("malformed", 0, trace.llm_calls, trace.fg_used))
        return Malformed(exc.reason, trace)

    best: Optional[CandidateWp] = None
    for cycle in range(1, config.max_cycles + 1):
        passed_validity = False
        for iteration in range(1, config.max_validity_iterations + 1):
            seed = _phase_seed(config, "validity", cycle, iteration)
            verdict = validity_fuzz(candidate.program, budget,
                                    config.generator.with_seed(seed),
                                    do_shrink=config.shrink,
                                    step_limit=config.step_limit)
            vacuous = is_vacuous_validity(verdict)
            trace.add(_validity_event(cycle, iteration, verdict, seed, vacuous))
            if isinstance(verdict, LikelyPass):
                if vacuous and config.strict_fuzz_blind:
                    return finish(FuzzBlind(candidate, trace))
                passed_validity = True
                best = candidate
                break
            # Counterexample: repair unless this was the last permitted try.
            if iteration == config.max_validity_iterations:
                break
            trace.add(RepairTriggered(PromptKind.REPAIR_VALIDITY, cycle,
                                      verdict.witness))
            try:
                candidate = session.obtain_candidate(
                    PromptKind.REPAIR_VALIDITY, cycle,
                    candidate.source, verdict.witness)
            except _MalformedRun as exc:
                return finish(Malformed(exc.reason, trace))
        if not passed_validity:
            return finish(ExhaustedBudget(best or candidate, trace))

        seed = _phase_seed(config, "weakness", cycle, 0)
        verdict = weakness_fuzz(candidate.program, budget,
                                config.generator.with_seed(seed),
                                do_shrink=config.shrink,
                                step_limit=config.step_limit)
        trace.add(_weakness_event(cycle, verdict, seed))
        if isinstance(verdict, LikelyPass):
            return finish(Accepted(candidate, trace))
        if cycle == config.max_cycles:
            return finish(ExhaustedBudget(candidate, trace))
        trace.add(RepairTriggered(PromptKind.REPAIR_WEAKNESS, cycle,
                                  verdict.witness))
        try:
            candidate = session.obtain_candidate(
                PromptKind.REPAIR_WEAKNESS, cycle,
                candidate.source, verdict.witness)
        except _MalformedRun as exc:
            return finish(Malformed(exc.reason, trace))
        trace.add(CycleCompleted(cycle))
    return finish(ExhaustedBudget(best or candidate, trace))


def _validity_event(cycle, iteration, verdict: FuzzVerdict, seed, vacuous):
    return ValidityVerdict(
        cycle=cycle, iteration=iteration,
        verdict="counterexample" if isinstance(verdict, Counterexample)
        else "likely-pass",
        trials=verdict.trials, satisfied=verdict.stats.satisfied,
        step_limited=verdict.stats.step_limited,
        precond_faults=verdict.stats.precond_faults, seed=seed,
        vacuous=vacuous,
        witness=verdict.witness if isinstance(verdict, Counterexample) else None)


def _weakness_event(cycle, verdict: FuzzVerdict, seed):
    return WeaknessVerdict(
        cycle=cycle,
        verdict="counterexample" if isinstance(verdict, Counterexample)
        else "likely-pass",
        trials=verdict.trials, satisfied=verdict.stats.satisfied,
        step_limited=verdict.stats.step_limited,
        precond_faults=verdict.stats.precond_faults, seed=seed,
        witness=verdict.witness if isinstance(verdict, Counterexample) else None)


# --- trace (de)serialization ---

_EVENT_KINDS = {
    PromptSent: "prompt-sent",
    CandidateReceived: "candidate-received",
    ValidityVerdict: "validity-verdict",
    WeaknessVerdict: "weakness-verdict",
    RepairTriggered: "repair-triggered",
    CycleCompleted: "cycle-completed",
    TerminalOutcome: "terminal-outcome",
}
_KIND_EVENTS = {v: k for k, v in _EVENT_KINDS.items()}


def _event_payload(event: TraceEvent) -> dict:
    payload = {}
    for name, value in vars(event).items():
        if isinstance(value, FuzzInput):
            value = {"a": list(value.a), "b": list(value.b), "c": list(value.c)}
        elif isinstance(value, PromptKind):
            value = value.value
        payload[name] = value
    return payload


def _event_from_payload(kind: str, payload: dict) -> TraceEvent:
    cls = _KIND_EVENTS[kind]
    kwargs = dict(payload)
    if "witness" in kwargs and kwargs["witness"] is not None:
        w = kwargs["witness"]
        kwargs["witness"] = FuzzInput(tuple(w["a"]), tuple(w["b"]), tuple(w["c"]))
    if "kind" in kwargs:
        kwargs["kind"] = PromptKind(kwargs["kind"])
    return cls(**kwargs)


def trace_to_lines(trace: FgTrace) -> list[str]:
    budget = trace.config.fuzz_budget
    meta = {
        "kind": "run-meta",
        "program_id": trace.program_id,
        "seed": trace.config.generator.seed,
        "wall_clock_s": budget.wall_clock_s,
        "trial_limit": budget.trial_limit,
        "max_validity_iterations": trace.config.max_validity_iterations,
        "max_cycles": trace.config.max_cycles,
        "fg_enabled": trace.config.fg_enabled,
        "llm_calls": trace.llm_calls,
        "cycles_used": trace.cycles_used,
    }
    lines = [json.dumps(meta, separators=(",", ":"))]
    for event in trace.events:
        record = {"kind": "event", "event": _EVENT_KINDS[type(event)],
                  "data": _event_payload(event)}
        lines.append(json.dumps(record, separators=(",", ":")))
    for exchange in trace.exchanges:
        record = {"kind": "exchange"}
        record.update(exchange)
        lines.append(json.dumps(record, separators=(",", ":")))
    return lines


def write_trace(trace: FgTrace, path: str | Path) -> None:
    Path(path).write_text("\n".join(trace_to_lines(trace)) + "\n",
                          encoding="utf-8")


def read_trace_events(path: str | Path) -> list[TraceEvent]:
    events = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            if record.get("kind") != "event":
                continue
            events.append(_event_from_payload(record["event"], record["data"]))
    return events


# --- trace legality ---

_TAKE_CANDIDATE = "candidate"
_TAKE_MALFORMED = "malformed"
_TAKE_ERROR = "error"


def validate_trace(events: list[TraceEvent],
                   max_validity_iterations: int = DEFAULT_MAX_VALIDITY_ITERATIONS,
                   max_cycles: int = DEFAULT_MAX_CYCLES) -> list[str]:
    """Check that an event sequence is one the guidance loop could emit.

    Rejects, among other shapes: a weakness verdict in a cycle with no
    validity pass, more validity repairs in a cycle than the iteration cap
    allows, and non-terminal events after the terminal outcome. Returns a
    list of problems; empty means legal.
    """
    problems = _walk_trace(events, max_validity_iterations, max_cycles)
    if not problems:
        _terminal_context_checks(events, problems)
    return problems


def _terminal_context_checks(events: list[TraceEvent],
                             problems: list[str]) -> None:
    if not events or not isinstance(events[-1], TerminalOutcome):
        return
    terminal = events[-1]
    prev = events[-2] if len(events) >= 2 else None
    fuzzed = any(isinstance(e, (ValidityVerdict, WeaknessVerdict))
                 for e in events)
    if terminal.outcome == "accepted" and fuzzed:
        if not (isinstance(prev, WeaknessVerdict)
                and prev.verdict == "likely-pass"):
            problems.append("accepted outcome without a passing weakness "
                            "phase directly before it")
    if terminal.outcome == "fuzz-blind":
        if not (isinstance(prev, ValidityVerdict)
                and prev.verdict == "likely-pass" and prev.vacuous):
            problems.append("fuzz-blind outcome without a vacuous validity "
                            "pass directly before it")


def _walk_trace(events: list[TraceEvent],
                max_validity_iterations: int,
                max_cycles: int) -> list[str]:
    problems: list[str] = []
    i = 0
    n = len(events)

    def bad(msg: str) -> None:
        problems.append(msg)

    def at_terminal() -> bool:
        return i < n and isinstance(events[i], TerminalOutcome)

    def check_terminal_last() -> None:
        if i != n - 1:
            bad(f"event {i}: terminal outcome is not the last event")

    def take_prompt_and_candidate(expected_kind: PromptKind) -> str:
        """Consume PromptSent [retry PromptSent] CandidateReceived.

        Leaves i at the TerminalOutcome when the run ended malformed here.
        """
        nonlocal i
        if i >= n or not isinstance(events[i], PromptSent):
            bad(f"event {i}: expected a {expected_kind.value} prompt")
            return _TAKE_ERROR
        if events[i].kind is not expected_kind:
            bad(f"event {i}: expected {expected_kind.value} prompt, "
                f"got {events[i].kind.value}")
            return _TAKE_ERROR
        i += 1
        if i < n and isinstance(events[i], PromptSent):
            if events[i].kind is not expected_kind or not events[i].retry:
                bad(f"event {i}: only a single format-reminder retry of the "
                    f"same prompt kind may follow")
                return _TAKE_ERROR
            i += 1
        if at_terminal():
            if events[i].outcome != "malformed":
                bad(f"event {i}: a prompt without a candidate must end the "
                    f"run as malformed")
                return _TAKE_ERROR
            check_terminal_last()
            return _TAKE_MALFORMED
        if i >= n or not isinstance(events[i], CandidateReceived):
            bad(f"event {i}: expected a candidate after the prompt")
            return _TAKE_ERROR
        i += 1
        return _TAKE_CANDIDATE

    status = take_prompt_and_candidate(PromptKind.INITIAL_WP)
    if status is not _TAKE_CANDIDATE:
        return problems
    if at_terminal():
        # Legal only for a run without fuzzing (single prompt, accepted).
        if events[i].outcome not in ("accepted", "malformed"):
            bad(f"event {i}: terminal {events[i].outcome} cannot directly "
                f"follow the initial candidate")
        check_terminal_last()
        return problems

    cycle = 0
    while i < n:
        cycle += 1
        if cycle > max_cycles:
            bad(f"event {i}: more than {max_cycles} cycles")
            return problems
        validity_attempts = 0
        validity_repairs = 0
        passed = False
        while i < n and isinstance(events[i], ValidityVerdict):
            validity_attempts += 1
            if validity_attempts > max_validity_iterations:
                bad(f"event {i}: more than {max_validity_iterations} "
                    f"validity attempts in cycle {cycle}")
                return problems
            verdict = events[i]
            i += 1
            if verdict.verdict == "likely-pass":
                passed = True
                break
            # Counterexample: either a repair follows, or the run ends.
            if i < n and isinstance(events[i], RepairTriggered) \
                    and events[i].kind is PromptKind.REPAIR_VALIDITY:
                validity_repairs += 1
                if validity_repairs >= max_validity_iterations:
                    bad(f"event {i}: validity repair after the final "
                        f"attempt in cycle {cycle}")
                    return problems
                i += 1
                status = take_prompt_and_candidate(PromptKind.REPAIR_VALIDITY)
                if status is not _TAKE_CANDIDATE:
                    return problems
                if at_terminal():
                    if events[i].outcome != "malformed":
                        bad(f"event {i}: a repair candidate must be fuzzed "
                            f"before the run can end {events[i].outcome}")
                    check_terminal_last()
                    return problems
                continue
            break
        if i < n and isinstance(events[i], WeaknessVerdict):
            if not passed:
                bad(f"event {i}: weakness phase before a validity pass in "
                    f"cycle {cycle}")
                return problems
            weakness = events[i]
            i += 1
            if weakness.verdict == "counterexample" and i < n \
                    and isinstance(events[i], RepairTriggered):
                if events[i].kind is not PromptKind.REPAIR_WEAKNESS:
                    bad(f"event {i}: repair after a weakness counterexample "
                        f"must be a weakness repair")
                    return problems
                i += 1
                status = take_prompt_and_candidate(PromptKind.REPAIR_WEAKNESS)
                if status is not _TAKE_CANDIDATE:
                    return problems
                if at_terminal():
                    if events[i].outcome != "malformed":
                        bad(f"event {i}: a repair candidate must be fuzzed "
                            f"before the run can end {events[i].outcome}")
                    check_terminal_last()
                    return problems
                if i < n and isinstance(events[i], CycleCompleted):
                    i += 1
                    continue
                bad(f"event {i}: expected cycle-completed after a weakness "
                    f"repair")
                return problems
        if at_terminal():
            check_terminal_last()
            return problems
        if i < n:
            bad(f"event {i}: unexpected {type(events[i]).__name__}")
            return problems
    bad("trace does not end with a terminal outcome")
    return problems


# --- replay ---

@dataclass
class ReplayReport:
    outcome: WpOutcome
    divergences: list


def replay_run(program: ProgramAst, transcript_path: str | Path,
               config: FgConfig | None = None,
               program_id: str = "") -> ReplayReport:
    """Re-drive a run from a recorded transcript, collecting prompt-hash
    divergences instead of failing on them."""
    from .llm import ReplayProvider

    provider = ReplayProvider(transcript_path, strict=False)
    outcome = fg_generate(program, provider, config, program_id=program_id)
    return ReplayReport(outcome=outcome, divergences=provider.divergences)
