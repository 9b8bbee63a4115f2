"""Function-calling items and the generator/discriminator refinement loop.

Items declare their tools inline; calls may wire an earlier call's result
into an argument with the reference token ``{{call_k}}`` (k is the
0-based index of the producing call). Tokens only ever point backwards,
so the dependency graph is a DAG by construction, and its shape
classifies the item: single, parallel (independent calls), chain (one
path through every call), or network (any other DAG).

Each loop round samples seeds from the pool, asks the generator backend
for new candidates, drops mechanically invalid ones locally, lets the
discriminator score the rest, and appends accepted items to the pool.
The pool only ever grows and never holds two items with the same id.
"""

from __future__ import annotations

import hashlib
import json
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .backends import BackendError, complete_with_retries
from .records import write_jsonl

PARAM_TYPES = ("string", "integer", "number", "boolean", "array", "object")

SCORE_AXES = ("thought_quality", "complexity", "realism", "consistency")

TOPOLOGIES = ("single", "parallel", "chain", "network")

REFERENCE_RE = re.compile(r"^\{\{call_(\d+)\}\}$")


class ItemParseError(ValueError):
    """Structurally unusable item record (not schema-invalid, unparseable)."""


@dataclass(frozen=True)
class ParamSpec:
    type: str
    description: str = ""
    required: bool = False


@dataclass(frozen=True)
class FunctionSpec:
    name: str
    description: str = ""
    parameters: dict[str, ParamSpec] = field(default_factory=dict)


@dataclass(frozen=True)
class ToolCall:
    name: str
    arguments: dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class FnCallItem:
    id: str
    query: str
    tools: tuple[FunctionSpec, ...]
    thought: str
    calls: tuple[ToolCall, ...]


@dataclass(frozen=True)
class DiscVerdict:
    accept: bool
    scores: dict[str, float]
    rationale: str


@dataclass(frozen=True)
class LoopConfig:
    rounds: int = 5
    batch: int = 4
    accept_threshold: float = 0.7
    consistency_floor: float = 0.5
    target_pool_size: int | None = None
    rng_seed: int = 0
    disc_concurrency: int = 4
    retries: int = 2

    def validate(self) -> None:
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        for name in ("accept_threshold", "consistency_floor"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")


@dataclass
class RoundStats:
    round: int
    generated: int = 0
    parse_failed: int = 0
    invalid: int = 0
    rejected: int = 0
    undecided: int = 0
    accepted: int = 0
    deduped: int = 0
    pool_size: int = 0
    error: str | None = None

    def to_dict(self) -> dict:
        out = {
            "round": self.round,
            "generated": self.generated,
            "parse_failed": self.parse_failed,
            "invalid": self.invalid,
            "rejected": self.rejected,
            "undecided": self.undecided,
            "accepted": self.accepted,
            "deduped": self.deduped,
            "pool_size": self.pool_size,
        }
        if self.error is not None:
            out["error"] = self.error
        return out


# ---------------------------------------------------------------------------
# Serialization and identity
# ---------------------------------------------------------------------------


def tools_to_obj(tools: tuple[FunctionSpec, ...]) -> list[dict]:
    return [
        {
            "name": t.name,
            "description": t.description,
            "parameters": {
                p: {"type": s.type, "description": s.description, "required": s.required}
                for p, s in t.parameters.items()
            },
        }
        for t in tools
    ]


def calls_to_obj(calls: tuple[ToolCall, ...]) -> list[dict]:
    return [{"name": c.name, "arguments": c.arguments} for c in calls]


def item_to_obj(item: FnCallItem) -> dict:
    return {
        "id": item.id,
        "query": item.query,
        "tools": tools_to_obj(item.tools),
        "thought": item.thought,
        "calls": calls_to_obj(item.calls),
    }


def item_id(query: str, tools: tuple[FunctionSpec, ...], calls: tuple[ToolCall, ...]) -> str:
    """Stable content hash over the normalized query, tools, and calls."""
    payload = json.dumps(
        {
            "query": " ".join(query.split()),
            "tools": tools_to_obj(tools),
            "calls": calls_to_obj(calls),
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def parse_item(obj: object) -> FnCallItem:
    """Build an item from a decoded record; the id is always recomputed."""
    if not isinstance(obj, dict):
        raise ItemParseError("item record is not a JSON object")
    query = obj.get("query")
    thought = obj.get("thought", "")
    if not isinstance(query, str) or not query:
        raise ItemParseError("missing or empty query")
    if not isinstance(thought, str):
        raise ItemParseError("thought must be a string")
    raw_tools = obj.get("tools")
    raw_calls = obj.get("calls")
    if not isinstance(raw_tools, list) or not raw_tools:
        raise ItemParseError("missing or empty tools list")
    if not isinstance(raw_calls, list) or not raw_calls:
        raise ItemParseError("missing or empty calls list")

    tools = []
    for t in raw_tools:
        if not isinstance(t, dict) or not isinstance(t.get("name"), str) or not t["name"]:
            raise ItemParseError("tool entry missing name")
        params = {}
        raw_params = t.get("parameters", {})
        if not isinstance(raw_params, dict):
            raise ItemParseError(f"tool {t['name']}: parameters must be an object")
        for pname, spec in raw_params.items():
            if not isinstance(spec, dict) or not isinstance(spec.get("type"), str):
                raise ItemParseError(f"tool {t['name']}: parameter {pname} missing type")
            params[pname] = ParamSpec(
                type=spec["type"],
                description=str(spec.get("description", "")),
                required=bool(spec.get("required", False)),
            )
        tools.append(
            FunctionSpec(name=t["name"], description=str(t.get("description", "")), parameters=params)
        )

    calls = []
    for c in raw_calls:
        if not isinstance(c, dict) or not isinstance(c.get("name"), str) or not c["name"]:
            raise ItemParseError("call entry missing name")
        args = c.get("arguments", {})
        if not isinstance(args, dict):
            raise ItemParseError(f"call {c['name']}: arguments must be an object")
        calls.append(ToolCall(name=c["name"], arguments=args))

    tools_t = tuple(tools)
    calls_t = tuple(calls)
    return FnCallItem(
        id=item_id(query, tools_t, calls_t),
        query=query,
        tools=tools_t,
        thought=thought,
        calls=calls_t,
    )


def item_to_json(item: FnCallItem) -> str:
    return json.dumps(item_to_obj(item), ensure_ascii=False)


def dump_pool(pool: list[FnCallItem], path: str | Path) -> None:
    write_jsonl(path, (item_to_json(item) for item in pool))


# ---------------------------------------------------------------------------
# Validation and topology
# ---------------------------------------------------------------------------


def _literal_matches(value: object, ptype: str) -> bool:
    if ptype == "string":
        return isinstance(value, str)
    if ptype == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if ptype == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if ptype == "boolean":
        return isinstance(value, bool)
    if ptype == "array":
        return isinstance(value, list)
    if ptype == "object":
        return isinstance(value, dict)
    return False


def extract_refs(value: object) -> list[int]:
    """Collect reference-token targets anywhere inside an argument value."""
    if isinstance(value, str):
        m = REFERENCE_RE.match(value)
        return [int(m.group(1))] if m else []
    if isinstance(value, list):
        return [k for v in value for k in extract_refs(v)]
    if isinstance(value, dict):
        return [k for v in value.values() for k in extract_refs(v)]
    return []


def validate_item(item: FnCallItem) -> list[str]:
    """Mechanically checkable invariants; empty list means valid."""
    violations: list[str] = []
    by_name: dict[str, FunctionSpec] = {}
    for tool in item.tools:
        if tool.name in by_name:
            violations.append(f"duplicate tool name: {tool.name}")
        by_name[tool.name] = tool
        for pname, spec in tool.parameters.items():
            if spec.type not in PARAM_TYPES:
                violations.append(f"tool {tool.name}: unknown type for {pname}: {spec.type}")

    for idx, call in enumerate(item.calls):
        tool = by_name.get(call.name)
        if tool is None:
            violations.append(f"call {idx}: unknown tool: {call.name}")
            continue
        for pname, spec in tool.parameters.items():
            if spec.required and pname not in call.arguments:
                violations.append(f"call {idx}: missing required parameter: {pname}")
        for pname, value in call.arguments.items():
            spec = tool.parameters.get(pname)
            if spec is None:
                violations.append(f"call {idx}: unknown parameter: {pname}")
                continue
            if isinstance(value, str) and REFERENCE_RE.match(value):
                continue  # reference tokens type-check as deferred
            if not _literal_matches(value, spec.type):
                violations.append(f"call {idx}: type mismatch: {pname}")
        for target in {k for v in call.arguments.values() for k in extract_refs(v)}:
            if target >= idx:
                violations.append(f"call {idx}: forward reference: {{{{call_{target}}}}}")
    return violations


def dependency_edges(item: FnCallItem) -> set[tuple[int, int]]:
    edges = set()
    for idx, call in enumerate(item.calls):
        for value in call.arguments.values():
            for target in extract_refs(value):
                edges.add((target, idx))
    return edges


def classify_topology(item: FnCallItem) -> str:
    """single | parallel | chain | network, from the reference-token DAG."""
    n = len(item.calls)
    if n == 1:
        return "single"
    edges = dependency_edges(item)
    if not edges:
        return "parallel"
    if len(edges) == n - 1:
        succ: dict[int, int] = {}
        pred: dict[int, int] = {}
        simple = True
        for src, dst in edges:
            if src in succ or dst in pred:
                simple = False
                break
            succ[src] = dst
            pred[dst] = src
        if simple:
            sources = [v for v in range(n) if v not in pred]
            if len(sources) == 1:
                length = 1
                node = sources[0]
                while node in succ:
                    node = succ[node]
                    length += 1
                if length == n:
                    return "chain"
    return "network"


# ---------------------------------------------------------------------------
# Loop operations
# ---------------------------------------------------------------------------


@dataclass
class GenerationResult:
    candidates: list[FnCallItem]
    parse_failed: int


@dataclass(frozen=True)
class SeedLoadReport:
    pool: list[FnCallItem]
    rejections: list[tuple[int, str]]
    deduped: int


def load_seed(path: str | Path) -> SeedLoadReport:
    """Load seed items, rejecting schema-invalid records with reasons."""
    pool: list[FnCallItem] = []
    rejections: list[tuple[int, str]] = []
    seen: set[str] = set()
    deduped = 0
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            item = parse_item(json.loads(line))
        except (json.JSONDecodeError, ItemParseError) as exc:
            rejections.append((line_no, str(exc)))
            continue
        violations = validate_item(item)
        if violations:
            rejections.append((line_no, "; ".join(violations)))
            continue
        if item.id in seen:
            deduped += 1
            continue
        seen.add(item.id)
        pool.append(item)
    return SeedLoadReport(pool=pool, rejections=rejections, deduped=deduped)


def build_generation_prompt(seeds: list[FnCallItem], n: int) -> str:
    seed_objs = [item_to_obj(s) for s in seeds]
    return (
        "Seed examples:\n```json\n"
        + json.dumps(seed_objs, ensure_ascii=False, indent=2)
        + "\n```\n\n"
        + f"Generate exactly {n} new function-calling items in the same record "
        "format, one JSON object per line, no surrounding prose. Vary the "
        "queries, push parameter values toward edge cases, and mix call "
        "shapes: independent calls, pipelines that feed one call's result "
        "into the next with {{call_k}} tokens, and wider dependency graphs."
    )


def build_discrimination_prompt(item: FnCallItem) -> str:
    return (
        "Candidate item:\n```json\n"
        + json.dumps(item_to_obj(item), ensure_ascii=False, indent=2)
        + "\n```\n\n"
        + "Score this candidate on each axis in [0, 1] and answer as one JSON "
        'object {"scores": {"thought_quality": x, "complexity": x, "realism": '
        'x, "consistency": x}, "rationale": "..."} with no other text.'
    )


def generate(
    backend, seeds: list[FnCallItem], criteria: str, n: int, retries: int = 2
) -> GenerationResult:
    """Ask the generator for up to n candidates; count unparseable lines."""
    if n <= 0:
        return GenerationResult(candidates=[], parse_failed=0)
    if not seeds:
        raise ValueError("generate needs at least one seed item")
    messages = [
        {"role": "system", "content": criteria},
        {"role": "user", "content": build_generation_prompt(seeds, n)},
    ]
    text = complete_with_retries(backend, messages, retries=retries)
    candidates: list[FnCallItem] = []
    parse_failed = 0
    for line in text.splitlines():
        if not line.strip():
            continue
        if len(candidates) >= n:
            break
        try:
            candidates.append(parse_item(json.loads(line)))
        except (json.JSONDecodeError, ItemParseError):
            parse_failed += 1
    return GenerationResult(candidates=candidates, parse_failed=parse_failed)


def _parse_verdict(text: str) -> dict[str, float]:
    obj = json.loads(text)
    if not isinstance(obj, dict) or not isinstance(obj.get("scores"), dict):
        raise ValueError("verdict missing scores object")
    scores = {}
    for axis in SCORE_AXES:
        value = obj["scores"].get(axis)
        if not isinstance(value, (int, float)) or not 0.0 <= float(value) <= 1.0:
            raise ValueError(f"score {axis} missing or outside [0, 1]")
        scores[axis] = float(value)
    scores["_rationale"] = obj.get("rationale", "")
    return scores


def discriminate(
    backend, candidate: FnCallItem, criteria: str, cfg: LoopConfig
) -> DiscVerdict | None:
    """Score one candidate; None means undecided after exhausting retries.

    Acceptance needs the mean score at or above the threshold, the
    consistency score at or above its hard floor, and no axis scored
    exactly zero: a zeroed axis is the discriminator saying the item
    fails that criterion outright.
    """
    messages = [
        {"role": "system", "content": criteria},
        {"role": "user", "content": build_discrimination_prompt(candidate)},
    ]
    attempt = 0
    while True:
        try:
            text = complete_with_retries(backend, messages, retries=0)
            raw = _parse_verdict(text)
            break
        except (BackendError, ValueError, json.JSONDecodeError):
            attempt += 1
            if attempt > cfg.retries:
                return None
    rationale = str(raw.pop("_rationale"))
    mean = sum(raw.values()) / len(raw)
    accept = (
        mean >= cfg.accept_threshold
        and raw["consistency"] >= cfg.consistency_floor
        and min(raw.values()) > 0.0
    )
    return DiscVerdict(accept=accept, scores=raw, rationale=rationale)


def run_rounds(
    cfg: LoopConfig,
    generator_backend,
    discriminator_backend,
    pool: list[FnCallItem],
    criteria: str,
) -> tuple[list[FnCallItem], list[RoundStats]]:
    """Grow the pool for cfg.rounds rounds or until the target size."""
    import random

    cfg.validate()
    if not pool:
        raise ValueError("run_rounds needs a non-empty seed pool")
    pool = list(pool)
    ids = {item.id for item in pool}
    rng = random.Random(cfg.rng_seed)
    stats: list[RoundStats] = []

    for rnd in range(1, cfg.rounds + 1):
        if cfg.target_pool_size is not None and len(pool) >= cfg.target_pool_size:
            break
        sample = [pool[rng.randrange(len(pool))] for _ in range(cfg.batch)]
        row = RoundStats(round=rnd)
        try:
            gen = generate(
                generator_backend, sample, criteria, cfg.batch, retries=cfg.retries
            )
        except BackendError as exc:
            row.error = f"generator failed: {exc}"
            row.pool_size = len(pool)
            stats.append(row)
            continue
        row.parse_failed = gen.parse_failed
        row.generated = gen.parse_failed + len(gen.candidates)

        valid: list[FnCallItem] = []
        for candidate in gen.candidates:
            if validate_item(candidate):
                row.invalid += 1
            else:
                valid.append(candidate)

        if cfg.disc_concurrency > 1 and len(valid) > 1:
            with ThreadPoolExecutor(max_workers=cfg.disc_concurrency) as pool_exec:
                verdicts = list(
                    pool_exec.map(
                        lambda c: discriminate(discriminator_backend, c, criteria, cfg),
                        valid,
                    )
                )
        else:
            verdicts = [discriminate(discriminator_backend, c, criteria, cfg) for c in valid]

        for candidate, verdict in zip(valid, verdicts):
            if verdict is None:
                row.undecided += 1
            elif not verdict.accept:
                row.rejected += 1
            else:
                row.accepted += 1
                if candidate.id in ids:
                    row.deduped += 1
                else:
                    ids.add(candidate.id)
                    pool.append(candidate)
        row.pool_size = len(pool)
        stats.append(row)

    return pool, stats
