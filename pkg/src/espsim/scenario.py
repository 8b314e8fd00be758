"""Scenario files: a small sectioned key/value format.

::

    # comments run to end of line
    [scenario]
    alpha = 2
    P = 4
    policies = uceq, nequi
    objectives = G
    output = -

    [instance small]
    job = 0 : 4@4, 1@inf        # release : work@parallelism, ...
    job = 2@1                   # release defaults to 0

    [generator lb]
    kind = theorem5

    [generator mix]
    kind = uniform-random
    seed = 7
    count = 3
    jobs = 4
    phases = 1..3
    work = 0.5..4
    parallelism = 1..8
    inf_fraction = 0.2
    release_spread = 2

    [game robust]
    budget = 1

Sections may override ``policies`` and ``objectives``. Parallelism ``inf``
marks a fully-parallel phase.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .adversarial import theorem5_instance
from .model import Instance, Job, ModelError, Phase, PowerParams
from .policies import POLICIES

SEED_ENV = "ESPSIM_SEED"
OBJECTIVES = ("G", "H")
SECTION_KINDS = ("instance", "generator", "game")
GENERATOR_KINDS = ("theorem5", "uniform-random")


class ScenarioError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, key: Optional[str] = None):
        self.line = line
        self.key = key
        where = f"line {line}: " if line is not None else ""
        field_ = f"field {key!r}: " if key else ""
        super().__init__(f"{where}{field_}{message}")


@dataclass
class Section:
    kind: str
    name: str
    line: int
    entries: list[tuple[str, str, int]] = field(default_factory=list)
    policies: Optional[tuple[str, ...]] = None
    objectives: Optional[tuple[str, ...]] = None

    def get(self, key: str, default=None):
        for k, v, _ in self.entries:
            if k == key:
                return v
        return default

    def line_of(self, key: str) -> int:
        for k, _, ln in self.entries:
            if k == key:
                return ln
        return self.line


@dataclass
class Scenario:
    alpha: float
    P: int
    policies: tuple[str, ...]
    objectives: tuple[str, ...]
    sections: list[Section]
    output: str = "-"
    source: str = "<string>"

    @property
    def params(self) -> PowerParams:
        return PowerParams(self.alpha, self.P)

    def with_overrides(self, **kw) -> "Scenario":
        return replace(self, **kw)


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------

_HEADER = re.compile(r"^\[\s*([A-Za-z_-]+)(?:\s+([^\]]+?))?\s*\]$")


def _split_list(value: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _num(value: str, key: str, line: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ScenarioError(f"expected a number, got {value!r}", line, key) from None


def _int(value: str, key: str, line: int) -> int:
    try:
        return int(value)
    except ValueError:
        raise ScenarioError(f"expected an integer, got {value!r}", line, key) from None


def _range(value: str, key: str, line: int, cast=float) -> tuple:
    parts = value.split("..")
    if len(parts) == 1:
        v = cast(_num(parts[0], key, line))
        return v, v
    if len(parts) != 2:
        raise ScenarioError(f"expected lo..hi, got {value!r}", line, key)
    lo, hi = (cast(_num(p, key, line)) for p in parts)
    if lo > hi:
        raise ScenarioError(f"empty range {value!r}", line, key)
    return lo, hi


def _bool(value: str, key: str, line: int) -> bool:
    v = value.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ScenarioError(f"expected a boolean, got {value!r}", line, key)


def _check_policies(names, line) -> tuple[str, ...]:
    names = tuple(n.lower() for n in names)
    if not names:
        raise ScenarioError("needs at least one policy", line, "policies")
    for n in names:
        if n not in POLICIES:
            raise ScenarioError(f"unknown policy {n!r}", line, "policies")
    return names


def _check_objectives(names, line) -> tuple[str, ...]:
    names = tuple(n.upper() for n in names)
    if not names:
        raise ScenarioError("needs at least one objective", line, "objectives")
    for n in names:
        if n not in OBJECTIVES:
            raise ScenarioError(f"unknown objective {n!r} (use G or H)", line, "objectives")
    return names


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    header: dict[str, tuple[str, int]] = {}
    sections: list[Section] = []
    current: Optional[Section] = None
    in_header = False

    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            kind, name = m.group(1).lower(), (m.group(2) or "").strip()
            if kind == "scenario":
                in_header, current = True, None
                continue
            if kind not in SECTION_KINDS:
                raise ScenarioError(f"unknown section kind {kind!r}", ln)
            name = name or f"{kind}{len(sections) + 1}"
            if any(s.name == name for s in sections):
                raise ScenarioError(f"duplicate section name {name!r}", ln)
            current = Section(kind, name, ln)
            sections.append(current)
            in_header = False
            continue
        if "=" not in line:
            raise ScenarioError(f"expected 'key = value', got {line!r}", ln)
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.lower() if key != "P" else key
        if in_header:
            header[key] = (value, ln)
        elif current is not None:
            current.entries.append((key, value, ln))
        else:
            raise ScenarioError("key outside of any section", ln, key)

    def hget(key):
        return header.get(key, header.get(key.lower(), (None, None)))

    a_val, a_ln = hget("alpha")
    if a_val is None:
        raise ScenarioError("missing required field", None, "alpha")
    alpha = _num(a_val, "alpha", a_ln)
    if not alpha > 1 or not math.isfinite(alpha):
        raise ScenarioError(f"alpha must exceed 1 (got {a_val})", a_ln, "alpha")
    p_val, p_ln = hget("P")
    if p_val is None:
        raise ScenarioError("missing required field", None, "P")
    P = _int(p_val, "P", p_ln)
    if P < 1:
        raise ScenarioError(f"P must be a positive integer (got {p_val})", p_ln, "P")

    pol_val, pol_ln = hget("policies")
    policies = _check_policies(_split_list(pol_val or "uceq"), pol_ln)
    obj_val, obj_ln = hget("objectives")
    objectives = _check_objectives(_split_list(obj_val or "G"), obj_ln)
    output = hget("output")[0] or "-"

    if not sections:
        raise ScenarioError("scenario defines no instance, generator or game sections")
    for sec in sections:
        if sec.get("policies") is not None:
            sec.policies = _check_policies(_split_list(sec.get("policies")),
                                           sec.line_of("policies"))
        if sec.get("objectives") is not None:
            sec.objectives = _check_objectives(_split_list(sec.get("objectives")),
                                               sec.line_of("objectives"))
        _validate_section(sec)

    return Scenario(alpha, P, policies, objectives, sections, output, source)


def load_scenario(path: str | os.PathLike) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {p}: {exc.strerror}") from None
    return parse_scenario(text, str(p))


_COMMON = {"policies", "objectives"}
_ALLOWED = {
    "instance": {"job"},
    "game": {"budget"},
    "theorem5": {"kind"},
    "uniform-random": {"kind", "seed", "count", "jobs", "phases", "work", "parallelism",
                       "inf_fraction", "parseq", "release_spread"},
}


def _validate_section(sec: Section) -> None:
    if sec.kind == "generator":
        kind = sec.get("kind")
        if kind is None:
            raise ScenarioError("generator needs a kind", sec.line, "kind")
        if kind not in GENERATOR_KINDS:
            raise ScenarioError(f"unknown generator kind {kind!r}", sec.line_of("kind"), "kind")
        allowed = _ALLOWED[kind]
        if kind == "uniform-random":
            if sec.get("seed") is None:
                raise ScenarioError("random generators need a seed", sec.line, "seed")
            _random_spec(sec, seed_override=None)
    else:
        allowed = _ALLOWED[sec.kind]
    for k, _, ln in sec.entries:
        if k not in allowed | _COMMON:
            raise ScenarioError(f"unknown key in [{sec.kind} {sec.name}]", ln, k)
    if sec.kind == "instance":
        if sec.get("job") is None:
            raise ScenarioError("instance needs at least one 'job' line", sec.line, "job")
        for k, v, ln in sec.entries:
            if k == "job":
                parse_job_line(v, 0, ln)
    if sec.kind == "game" and sec.get("budget") is not None:
        b = _num(sec.get("budget"), "budget", sec.line_of("budget"))
        if not b > 0:
            raise ScenarioError("budget must be positive", sec.line_of("budget"), "budget")


def _parallelism(token: str, line: int) -> float:
    t = token.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    return _num(t, "job", line)


def parse_job_line(value: str, job_id, line: int) -> Job:
    release = 0.0
    body = value
    if ":" in value:
        head, body = value.split(":", 1)
        release = _num(head.strip(), "job", line)
    phases = []
    for tok in _split_list(body):
        if "@" not in tok:
            raise ScenarioError(f"phase {tok!r} must be work@parallelism", line, "job")
        w, h = tok.split("@", 1)
        try:
            phases.append(Phase(_num(w.strip(), "job", line), _parallelism(h, line)))
        except ModelError as exc:
            raise ScenarioError(str(exc), line, "job") from None
    try:
        return Job(job_id, tuple(phases), release)
    except ModelError as exc:
        raise ScenarioError(str(exc), line, "job") from None


# --------------------------------------------------------------------------
# Instance generation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomSpec:
    seed: int
    count: int = 1
    jobs: int = 4
    phases: tuple[int, int] = (1, 3)
    work: tuple[float, float] = (0.5, 4.0)
    parallelism: tuple[float, float] = (1.0, 8.0)
    inf_fraction: float = 0.0
    parseq: bool = False
    release_spread: float = 0.0


def _random_spec(sec: Section, seed_override: Optional[int]) -> RandomSpec:
    g = sec.get
    ln = sec.line_of

    seed = seed_override if seed_override is not None else _int(g("seed"), "seed", ln("seed"))
    spec = RandomSpec(
        seed=seed,
        count=_int(g("count", "1"), "count", ln("count")),
        jobs=_int(g("jobs", "4"), "jobs", ln("jobs")),
        phases=_range(g("phases", "1..3"), "phases", ln("phases"), cast=int),
        work=_range(g("work", "0.5..4"), "work", ln("work")),
        parallelism=_range(g("parallelism", "1..8"), "parallelism", ln("parallelism")),
        inf_fraction=_num(g("inf_fraction", "0"), "inf_fraction", ln("inf_fraction")),
        parseq=_bool(g("parseq", "false"), "parseq", ln("parseq")),
        release_spread=_num(g("release_spread", "0"), "release_spread", ln("release_spread")),
    )
    checks = [
        (spec.count >= 1, "count", "must be >= 1"),
        (spec.jobs >= 1, "jobs", "must be >= 1"),
        (spec.phases[0] >= 1, "phases", "must be >= 1"),
        (spec.work[0] > 0, "work", "must be positive"),
        (spec.parallelism[0] >= 1, "parallelism", "must be >= 1"),
        (0 <= spec.inf_fraction <= 1, "inf_fraction", "must lie in [0, 1]"),
        (spec.release_spread >= 0, "release_spread", "must be >= 0"),
    ]
    for ok, key, msg in checks:
        if not ok:
            raise ScenarioError(msg, ln(key), key)
    return spec


def uniform_random_instance(params: PowerParams, spec: RandomSpec,
                            rng: np.random.Generator) -> Instance:
    """Jobs with uniformly drawn phase counts, works, integer parallelism and releases.

    With ``parseq`` each phase is sequential or fully parallel; otherwise a
    phase is fully parallel with probability ``inf_fraction``.
    """
    jobs = []
    for i in range(spec.jobs):
        k = int(rng.integers(spec.phases[0], spec.phases[1] + 1))
        phases = []
        for _ in range(k):
            w = float(rng.uniform(*spec.work))
            if spec.parseq:
                h = math.inf if rng.random() < (spec.inf_fraction or 0.5) else 1.0
            elif rng.random() < spec.inf_fraction:
                h = math.inf
            else:
                h = float(rng.integers(int(spec.parallelism[0]), int(spec.parallelism[1]) + 1))
            phases.append(Phase(w, h))
        r = float(rng.uniform(0, spec.release_spread)) if spec.release_spread > 0 else 0.0
        jobs.append(Job(i, tuple(phases), r))
    if spec.release_spread > 0:
        # the first job arrives at time 0
        first = min(j.release_time for j in jobs)
        jobs = [Job(j.id, j.phases, j.release_time - first) for j in jobs]
    return Instance(params, tuple(jobs))


@dataclass(frozen=True)
class Case:
    """One unit of work from a scenario: an instance to simulate or a game to play."""

    case_id: str
    section: Section
    instance: Optional[Instance] = None
    budget: Optional[float] = None


def env_seed() -> Optional[int]:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw.strip() == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def expand(scenario: Scenario, n_jobs: Optional[int] = None) -> list[Case]:
    """Materialize every section into concrete cases, in file order."""
    params = scenario.params
    seed_override = env_seed()
    cases: list[Case] = []
    for sec in scenario.sections:
        if sec.kind == "instance":
            jobs = [parse_job_line(v, i, ln)
                    for i, (_, v, ln) in enumerate(e for e in sec.entries if e[0] == "job")]
            cases.append(Case(sec.name, sec, Instance(params, tuple(jobs))))
        elif sec.kind == "game":
            b = sec.get("budget")
            budget = float(b) if b is not None else 1.0 / (params.alpha - 1.0)
            cases.append(Case(sec.name, sec, budget=budget))
        elif sec.get("kind") == "theorem5":
            cases.append(Case(sec.name, sec, theorem5_instance(params)))
        else:
            spec = _random_spec(sec, seed_override)
            if n_jobs is not None:
                spec = replace(spec, jobs=n_jobs)
            rng = np.random.default_rng(spec.seed)
            for k in range(spec.count):
                inst = uniform_random_instance(params, spec, rng)
                cid = sec.name if spec.count == 1 else f"{sec.name}#{k}"
                cases.append(Case(cid, sec, inst))
    return cases
