"""POMDP problem instances: parsing, validation, and belief-space probability ops."""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

# Probability rows must sum to 1 within this tolerance; rows inside the
# tolerance are renormalized, rows outside it are rejected.
ROW_TOL = 1e-9


class ModelError(ValueError):
    """Invalid POMDP model."""


class ParseError(ModelError):
    """Malformed model file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StochasticityError(ModelError):
    """A probability row does not sum to 1."""


@dataclass(frozen=True)
class PomdpModel:
    """A finite POMDP.

    transition[a, s, s1] = P(s1 | s, a)
    observation[a, s1, o] = P(o | s1, a)
    reward[a, s] = r(s, a)
    """

    state_names: tuple[str, ...]
    action_names: tuple[str, ...]
    observation_names: tuple[str, ...]
    transition: np.ndarray
    observation: np.ndarray
    reward: np.ndarray
    discount: float

    def __post_init__(self):
        n, na, no = len(self.state_names), len(self.action_names), len(self.observation_names)
        if n < 1 or na < 1 or no < 1:
            raise ModelError("state, action and observation spaces must be nonempty")
        if not 0.0 < self.discount < 1.0:
            raise ModelError(f"discount must satisfy 0 < discount < 1, got {self.discount}")
        T = np.asarray(self.transition, dtype=float)
        O = np.asarray(self.observation, dtype=float)
        R = np.asarray(self.reward, dtype=float)
        if T.shape != (na, n, n):
            raise ModelError(f"transition shape {T.shape} != {(na, n, n)}")
        if O.shape != (na, n, no):
            raise ModelError(f"observation shape {O.shape} != {(na, n, no)}")
        if R.shape != (na, n):
            raise ModelError(f"reward shape {R.shape} != {(na, n)}")
        if np.any(T < -ROW_TOL) or np.any(T > 1 + ROW_TOL):
            raise ModelError("transition probabilities outside [0, 1]")
        if np.any(O < -ROW_TOL) or np.any(O > 1 + ROW_TOL):
            raise ModelError("observation probabilities outside [0, 1]")
        T = np.clip(T, 0.0, 1.0)
        O = np.clip(O, 0.0, 1.0)
        for a in range(na):
            for s in range(n):
                total = T[a, s].sum()
                if abs(total - 1.0) > ROW_TOL:
                    raise StochasticityError(
                        f"transition row for action {self.action_names[a]!r}, "
                        f"state {self.state_names[s]!r} sums to {total:.12g}"
                    )
                T[a, s] /= total
            for s1 in range(n):
                total = O[a, s1].sum()
                if abs(total - 1.0) > ROW_TOL:
                    raise StochasticityError(
                        f"observation row for action {self.action_names[a]!r}, "
                        f"state {self.state_names[s1]!r} sums to {total:.12g}"
                    )
                O[a, s1] /= total
        for arr, name in ((T, "transition"), (O, "observation"), (R, "reward")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def num_states(self) -> int:
        return len(self.state_names)

    @property
    def num_actions(self) -> int:
        return len(self.action_names)

    @property
    def num_observations(self) -> int:
        return len(self.observation_names)


def validate_belief(b: np.ndarray, n: int | None = None) -> np.ndarray:
    """Check that `b` is a probability vector; returns it as a float array."""
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or (n is not None and b.size != n):
        raise ModelError(f"belief has wrong shape {b.shape}")
    if np.any(b < -ROW_TOL) or abs(b.sum() - 1.0) > ROW_TOL:
        raise ModelError("belief entries must be nonnegative and sum to 1")
    return b


def joint_prob(model: PomdpModel, a: int, s: int, s1: int, o1: int) -> float:
    """P(s1, o1 | s, a) = P(o1 | s1, a) P(s1 | s, a)."""
    return float(model.observation[a, s1, o1] * model.transition[a, s, s1])


def observation_prob(model: PomdpModel, b: np.ndarray, a: int, o1: int) -> float:
    """P(o1 | b, a): probability of observing o1 after executing a in belief b."""
    # sum_s b(s) sum_s1 P(s1|s,a) P(o1|s1,a)
    return float(b @ model.transition[a] @ model.observation[a, :, o1])


def belief_update(model: PomdpModel, b: np.ndarray, a: int, o1: int) -> np.ndarray | None:
    """Bayes update of belief b after action a and observation o1.

    Returns None when the observation has probability zero from b under a.
    """
    unnorm = (b @ model.transition[a]) * model.observation[a, :, o1]
    mass = unnorm.sum()
    if mass <= 0.0:
        return None
    return unnorm / mass


# ---------------------------------------------------------------------------
# .POMDP file format (Cassandra-style subset)
# ---------------------------------------------------------------------------


def _strip(line: str) -> str:
    idx = line.find("#")
    if idx >= 0:
        line = line[:idx]
    return line.strip()


class _Lines:
    """Line cursor with 1-based line numbers and comment stripping."""

    def __init__(self, text: str):
        self.raw = text.splitlines()
        self.pos = 0

    def next_content(self) -> tuple[int, str] | None:
        while self.pos < len(self.raw):
            self.pos += 1
            content = _strip(self.raw[self.pos - 1])
            if content:
                return self.pos, content
        return None

    def peek_content(self) -> tuple[int, str] | None:
        saved = self.pos
        out = self.next_content()
        self.pos = saved
        return out


def _parse_names(rest: str, what: str, lineno: int) -> list[str]:
    parts = rest.split()
    if not parts:
        raise ParseError(f"empty {what} declaration", lineno)
    if len(parts) == 1 and parts[0].isdigit():
        count = int(parts[0])
        if count < 1:
            raise ParseError(f"{what} count must be >= 1", lineno)
        return [f"{what[:-1]}{i}" for i in range(count)]
    return parts


def _resolve(name: str, names: tuple[str, ...], what: str, lineno: int) -> list[int]:
    if name == "*":
        return list(range(len(names)))
    if name.isdigit() and name not in names:
        idx = int(name)
        if idx >= len(names):
            raise ParseError(f"{what} index {idx} out of range", lineno)
        return [idx]
    try:
        return [names.index(name)]
    except ValueError:
        raise ParseError(f"unknown {what} {name!r}", lineno) from None


def _read_matrix(lines: _Lines, rows: int, cols: int, lineno: int) -> np.ndarray:
    values: list[float] = []
    while len(values) < rows * cols:
        entry = lines.next_content()
        if entry is None:
            raise ParseError("unexpected end of file inside matrix", lineno)
        lineno, content = entry
        try:
            values.extend(float(tok) for tok in content.split())
        except ValueError:
            raise ParseError(f"bad number in matrix: {content!r}", lineno) from None
    if len(values) != rows * cols:
        raise ParseError(f"matrix has {len(values)} entries, expected {rows * cols}", lineno)
    return np.array(values).reshape(rows, cols)


def parse_pomdp(source: str | io.TextIOBase) -> PomdpModel:
    """Parse a `.POMDP` text model (Cassandra-format subset).

    Supported: `discount:`, `values: reward`, `states:`/`actions:`/`observations:`
    (count or name list), `T:`/`O:` single entries or per-action matrices with
    `uniform`/`identity` keywords, and `R:` entries with `*` wildcards.
    """
    text = source if isinstance(source, str) else source.read()
    lines = _Lines(text)

    discount = None
    states = actions = observations = None
    T = O = None
    R4 = None  # reward as R[a, s, s1, o], marginalized at the end

    def require_spaces(lineno):
        if states is None or actions is None or observations is None:
            raise ParseError("states, actions and observations must be declared "
                             "before T/O/R entries", lineno)

    while True:
        entry = lines.next_content()
        if entry is None:
            break
        lineno, content = entry
        if ":" not in content:
            raise ParseError(f"unrecognized line: {content!r}", lineno)
        key, rest = content.split(":", 1)
        key = key.strip()
        rest = rest.strip()

        if key == "discount":
            try:
                discount = float(rest)
            except ValueError:
                raise ParseError(f"bad discount value {rest!r}", lineno) from None
        elif key == "values":
            if rest != "reward":
                raise ParseError(f"only 'values: reward' is supported, got {rest!r}", lineno)
        elif key == "states":
            states = tuple(_parse_names(rest, "states", lineno))
        elif key == "actions":
            actions = tuple(_parse_names(rest, "actions", lineno))
        elif key == "observations":
            observations = tuple(_parse_names(rest, "observations", lineno))
        elif key == "T":
            require_spaces(lineno)
            n = len(states)
            if T is None:
                T = np.full((len(actions), n, n), np.nan)
            parts = [p.strip() for p in rest.split(":")]
            for a in _resolve(parts[0], actions, "action", lineno):
                if len(parts) == 1:
                    nxt = lines.peek_content()
                    if nxt is not None and nxt[1] == "uniform":
                        lines.next_content()
                        T[a] = 1.0 / n
                    elif nxt is not None and nxt[1] == "identity":
                        lines.next_content()
                        T[a] = np.eye(n)
                    else:
                        T[a] = _read_matrix(lines, n, n, lineno)
                elif len(parts) == 3:
                    tail = parts[2].split()
                    if len(tail) != 2:
                        raise ParseError("expected 'T: <a> : <s> : <s1> <p>'", lineno)
                    s1_name, prob = tail
                    try:
                        p = float(prob)
                    except ValueError:
                        raise ParseError(f"bad probability {prob!r}", lineno) from None
                    for s in _resolve(parts[1], states, "state", lineno):
                        for s1 in _resolve(s1_name, states, "state", lineno):
                            T[a, s, s1] = p
                else:
                    raise ParseError("unsupported T line form", lineno)
        elif key == "O":
            require_spaces(lineno)
            n, no = len(states), len(observations)
            if O is None:
                O = np.full((len(actions), n, no), np.nan)
            parts = [p.strip() for p in rest.split(":")]
            for a in _resolve(parts[0], actions, "action", lineno):
                if len(parts) == 1:
                    nxt = lines.peek_content()
                    if nxt is not None and nxt[1] == "uniform":
                        lines.next_content()
                        O[a] = 1.0 / no
                    else:
                        O[a] = _read_matrix(lines, n, no, lineno)
                elif len(parts) == 3:
                    tail = parts[2].split()
                    if len(tail) != 2:
                        raise ParseError("expected 'O: <a> : <s1> : <o> <p>'", lineno)
                    o_name, prob = tail
                    try:
                        p = float(prob)
                    except ValueError:
                        raise ParseError(f"bad probability {prob!r}", lineno) from None
                    for s1 in _resolve(parts[1], states, "state", lineno):
                        for o in _resolve(o_name, observations, "observation", lineno):
                            O[a, s1, o] = p
                else:
                    raise ParseError("unsupported O line form", lineno)
        elif key == "R":
            require_spaces(lineno)
            if R4 is None:
                R4 = np.zeros((len(actions), len(states), len(states), len(observations)))
            parts = [p.strip() for p in rest.split(":")]
            if len(parts) != 4:
                raise ParseError("expected 'R: <a> : <s> : <s1> : <o> <r>'", lineno)
            tail = parts[3].split()
            if len(tail) != 2:
                raise ParseError("expected 'R: <a> : <s> : <s1> : <o> <r>'", lineno)
            o_name, val = tail
            try:
                r = float(val)
            except ValueError:
                raise ParseError(f"bad reward value {val!r}", lineno) from None
            for a in _resolve(parts[0], actions, "action", lineno):
                for s in _resolve(parts[1], states, "state", lineno):
                    for s1 in _resolve(parts[2], states, "state", lineno):
                        for o in _resolve(o_name, observations, "observation", lineno):
                            R4[a, s, s1, o] = r
        else:
            raise ParseError(f"unrecognized keyword {key!r}", lineno)

    if discount is None:
        raise ParseError("missing 'discount:' header")
    if states is None or actions is None or observations is None:
        raise ParseError("missing states/actions/observations declaration")
    if T is None or np.isnan(T).any():
        raise ParseError("transition table incomplete")
    if O is None or np.isnan(O).any():
        raise ParseError("observation table incomplete")
    if R4 is None:
        R4 = np.zeros((len(actions), len(states), len(states), len(observations)))

    # Marginalize R(a, s, s1, o) to r(s, a) by expectation over the model dynamics.
    reward = np.zeros((len(actions), len(states)))
    for a in range(len(actions)):
        # E[R | a, s] = sum_{s1} P(s1|s,a) sum_o P(o|s1,a) R(a,s,s1,o)
        expected_o = np.einsum("so,tso->ts", O[a], R4[a])  # [s, s1]
        reward[a] = np.einsum("ts,ts->t", T[a], expected_o)

    return PomdpModel(states, actions, observations, T, O, reward, discount)


def serialize_pomdp(model: PomdpModel) -> str:
    """Emit a `.POMDP` text rendering that parse_pomdp round-trips exactly."""
    out = [
        f"discount: {model.discount!r}",
        "values: reward",
        "states: " + " ".join(model.state_names),
        "actions: " + " ".join(model.action_names),
        "observations: " + " ".join(model.observation_names),
    ]
    for a, name in enumerate(model.action_names):
        for s in range(model.num_states):
            for s1 in range(model.num_states):
                out.append(f"T: {name} : {model.state_names[s]} : "
                           f"{model.state_names[s1]} {float(model.transition[a, s, s1])!r}")
    for a, name in enumerate(model.action_names):
        for s1 in range(model.num_states):
            for o in range(model.num_observations):
                out.append(f"O: {name} : {model.state_names[s1]} : "
                           f"{model.observation_names[o]} {float(model.observation[a, s1, o])!r}")
    for a, name in enumerate(model.action_names):
        for s in range(model.num_states):
            out.append(f"R: {name} : {model.state_names[s]} : * : * {float(model.reward[a, s])!r}")
    return "\n".join(out) + "\n"
