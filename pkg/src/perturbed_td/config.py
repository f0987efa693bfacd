"""Plain-text experiment configuration.

One ``key: value`` pair per line; ``#`` starts a comment.  A benchmark is either
named (``env: chain3``) or described inline::

    name: mychain
    states: 3
    actions: 2
    discount: 0.9
    trans: 0 0 0 1.0        # s a s' probability, repeatable
    reward: 0 0 1.0         # s a value, repeatable, missing entries are 0
    target: 0 1             # one line per state, in state order
    behavior: 0.9 0.1
    feature: 1 0            # one line per state
    theta0: 0 0

Run settings use the same keys as the command-line flags: ``algo``, ``eta``,
``alpha``, ``beta``, ``schedule`` (``constant`` or ``polynomial:EXP``), ``iters``,
``runs``, ``seed``, ``stride``, ``out``.
"""

from dataclasses import dataclass

import numpy as np

from .benchmarks import BUILDERS, Benchmark
from .errors import ConfigError, CoverageError
from .learners import ALGORITHMS, StepSchedule
from .mdp import Mdp, Policy

SCALAR_KEYS = {
    "env": str,
    "name": str,
    "states": int,
    "actions": int,
    "discount": float,
    "algo": str,
    "eta": float,
    "alpha": float,
    "beta": float,
    "schedule": str,
    "iters": int,
    "runs": int,
    "seed": int,
    "stride": int,
    "out": str,
    "theta0": None,
}
REPEATED_KEYS = ("trans", "reward", "target", "behavior", "feature")
INLINE_KEYS = ("name", "states", "actions", "discount", "theta0") + REPEATED_KEYS

DEFAULTS = {
    "algo": "perturbed",
    "eta": 0.0,
    "alpha": 0.01,
    "beta": None,
    "schedule": "constant",
    "iters": 10_000,
    "runs": 10,
    "seed": 0,
    "stride": 100,
    "out": "out",
}


@dataclass
class ParsedConfig:
    """Raw values with the line each came from (for error messages)."""

    scalars: dict
    repeated: dict
    lines: dict


def _numbers(text, line_no, key, kind=float):
    try:
        return [kind(tok) for tok in text.split()]
    except ValueError:
        raise ConfigError(f"line {line_no}: field '{key}': expected numbers, got {text!r}") from None


def parse_text(text):
    scalars, lines = {}, {}
    repeated = {k: [] for k in REPEATED_KEYS}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ConfigError(f"line {line_no}: expected 'key: value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split(":", 1))
        if key in REPEATED_KEYS:
            repeated[key].append((line_no, value))
            lines.setdefault(key, line_no)
        elif key in SCALAR_KEYS:
            if key in scalars:
                raise ConfigError(f"line {line_no}: field '{key}': given more than once")
            kind = SCALAR_KEYS[key]
            if kind is None:
                scalars[key] = _numbers(value, line_no, key)
            else:
                try:
                    scalars[key] = kind(value)
                except ValueError:
                    raise ConfigError(
                        f"line {line_no}: field '{key}': cannot parse {value!r} as {kind.__name__}"
                    ) from None
            lines[key] = line_no
        else:
            raise ConfigError(f"line {line_no}: unknown field '{key}'")
    return ParsedConfig(scalars, repeated, lines)


def _where(parsed, key):
    line = parsed.lines.get(key)
    return f"line {line}: field '{key}'" if line else f"field '{key}'"


def _index(value, limit, line_no, key, what):
    if not 0 <= value < limit:
        raise ConfigError(f"line {line_no}: field '{key}': {what} index {value} out of range [0, {limit})")
    return value


def _inline_benchmark(parsed):
    sc, rep = parsed.scalars, parsed.repeated
    for key in ("states", "actions", "discount"):
        if key not in sc:
            raise ConfigError(f"field '{key}': required for an inline MDP")
    n_s, n_a = sc["states"], sc["actions"]
    if n_s < 1 or n_a < 1:
        raise ConfigError(f"{_where(parsed, 'states')}: states and actions must be positive")

    p = np.zeros((n_s, n_a, n_s))
    for line_no, value in rep["trans"]:
        toks = value.split()
        if len(toks) != 4:
            raise ConfigError(f"line {line_no}: field 'trans': expected 's a s2 prob'")
        s, a, s2 = _numbers(" ".join(toks[:3]), line_no, "trans", int)
        prob = _numbers(toks[3], line_no, "trans")[0]
        _index(s, n_s, line_no, "trans", "state")
        _index(a, n_a, line_no, "trans", "action")
        _index(s2, n_s, line_no, "trans", "next state")
        p[s, a, s2] += prob

    r = np.zeros((n_s, n_a))
    for line_no, value in rep["reward"]:
        toks = value.split()
        if len(toks) != 3:
            raise ConfigError(f"line {line_no}: field 'reward': expected 's a value'")
        s, a = _numbers(" ".join(toks[:2]), line_no, "reward", int)
        _index(s, n_s, line_no, "reward", "state")
        _index(a, n_a, line_no, "reward", "action")
        r[s, a] = _numbers(toks[2], line_no, "reward")[0]

    def rows(key, width):
        entries = rep[key]
        if len(entries) != n_s:
            raise ConfigError(f"{_where(parsed, key)}: expected {n_s} lines, got {len(entries)}")
        out = []
        for line_no, value in entries:
            row = _numbers(value, line_no, key)
            if width is not None and len(row) != width:
                raise ConfigError(f"line {line_no}: field '{key}': expected {width} values, got {len(row)}")
            out.append(row)
        return out

    try:
        mdp = Mdp(p, r, sc["discount"])
    except ValueError as exc:
        msg = str(exc)
        bad = "discount" if "discount" in msg else "reward" if "reward" in msg else "trans"
        raise ConfigError(f"{_where(parsed, bad)}: {exc}") from None
    policies = {}
    for key in ("target", "behavior"):
        try:
            policies[key] = Policy(rows(key, n_a))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{_where(parsed, key)}: {exc}") from None
    feature_rows = rows("feature", None)
    if len({len(row) for row in feature_rows}) != 1:
        raise ConfigError(f"{_where(parsed, 'feature')}: rows have different lengths")
    phi = np.array(feature_rows)
    theta0 = sc.get("theta0", [0.0] * phi.shape[1])
    if len(theta0) != phi.shape[1]:
        raise ConfigError(f"{_where(parsed, 'theta0')}: expected {phi.shape[1]} values, got {len(theta0)}")
    try:
        return Benchmark(sc.get("name", "custom"), mdp, policies["target"], policies["behavior"], phi, np.array(theta0))
    except CoverageError:
        raise
    except ValueError as exc:
        raise ConfigError(f"field 'feature': {exc}") from None


def benchmark_from(parsed):
    env = parsed.scalars.get("env")
    if env is not None:
        clash = [k for k in INLINE_KEYS if k in parsed.scalars or parsed.repeated.get(k)]
        if clash:
            raise ConfigError(f"{_where(parsed, clash[0])}: cannot be combined with 'env'")
        if env not in BUILDERS:
            raise ConfigError(f"{_where(parsed, 'env')}: unknown benchmark {env!r}; choose from {sorted(BUILDERS)}")
        return BUILDERS[env]()
    if not any(parsed.repeated.values()) and "states" not in parsed.scalars:
        raise ConfigError("field 'env': no benchmark named and no inline MDP given")
    return _inline_benchmark(parsed)


def parse_schedule(text, alpha):
    kind, _, exp = text.partition(":")
    try:
        if kind == "constant" and not exp:
            return StepSchedule("constant", alpha)
        if kind == "polynomial":
            return StepSchedule("polynomial", alpha, float(exp) if exp else 1.0)
    except ValueError as exc:
        raise ConfigError(f"field 'schedule': {exc}") from None
    raise ConfigError(f"field 'schedule': expected 'constant' or 'polynomial:EXP', got {text!r}")


def check_algorithm(name):
    if name not in ALGORITHMS:
        raise ConfigError(f"field 'algo': unknown algorithm {name!r}; choose from {list(ALGORITHMS)}")
    return name


def _fmt(x):
    return repr(float(x))


def describe(benchmark):
    """Inline config text that parses back to an identical benchmark."""
    mdp = benchmark.mdp
    lines = [
        f"name: {benchmark.name}",
        f"states: {mdp.num_states}",
        f"actions: {mdp.num_actions}",
        f"discount: {_fmt(mdp.discount)}",
    ]
    for s, a, s2 in zip(*np.nonzero(mdp.transitions)):
        lines.append(f"trans: {s} {a} {s2} {_fmt(mdp.transitions[s, a, s2])}")
    for s, a in zip(*np.nonzero(mdp.rewards)):
        lines.append(f"reward: {s} {a} {_fmt(mdp.rewards[s, a])}")
    for key, policy in (("target", benchmark.target), ("behavior", benchmark.behavior)):
        lines.extend(f"{key}: " + " ".join(_fmt(x) for x in row) for row in policy.probs)
    lines.extend("feature: " + " ".join(_fmt(x) for x in row) for row in benchmark.features)
    lines.append("theta0: " + " ".join(_fmt(x) for x in benchmark.theta0))
    return "\n".join(lines) + "\n"
