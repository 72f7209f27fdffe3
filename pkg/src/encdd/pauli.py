"""Exact algebra of n-qubit Pauli strings and their weighted sums.

Qubit indices in the text form are 1-based and qubit 1 is the leftmost
Kronecker factor, so ``|01>`` means qubit 1 in ``|0>`` and qubit 2 in ``|1>``.
Phases follow the cyclic convention ``XY = iZ``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping, Union

import numpy as np

LETTERS = "IXYZ"

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# (a, b) -> (c, k) meaning a*b = i**k * c
_PRODUCT: dict[tuple[str, str], tuple[str, int]] = {}
for _a in LETTERS:
    _PRODUCT[("I", _a)] = (_a, 0)
    _PRODUCT[(_a, "I")] = (_a, 0)
    _PRODUCT[(_a, _a)] = ("I", 0)
for _a, _b, _c in ("XYZ", "YZX", "ZXY"):
    _PRODUCT[(_a, _b)] = (_c, 1)
    _PRODUCT[(_b, _a)] = (_c, 3)

_PHASES = (1, 1j, -1, -1j)


class DimensionError(ValueError):
    """Operands act on different numbers of qubits."""


def _check_same_size(n: int, m: int) -> None:
    if n != m:
        raise DimensionError(f"qubit count mismatch: {n} vs {m}")


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Paulis times a phase ``i**power``."""

    letters: str
    power: int = 0

    def __post_init__(self):
        if not self.letters:
            raise ValueError("a Pauli string needs at least one qubit")
        bad = set(self.letters) - set(LETTERS)
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)}")
        object.__setattr__(self, "power", self.power % 4)

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def phase(self) -> complex:
        return _PHASES[self.power]

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls("I" * n_qubits)

    @classmethod
    def from_sites(cls, n_qubits: int, sites: Mapping[int, str], power: int = 0) -> PauliString:
        """Build from a ``{qubit (1-based): letter}`` map."""
        letters = ["I"] * n_qubits
        for q, p in sites.items():
            if not 1 <= q <= n_qubits:
                raise ValueError(f"qubit index {q} outside 1..{n_qubits}")
            letters[q - 1] = p
        return cls("".join(letters), power)

    @classmethod
    def parse(cls, text: str, n_qubits: int | None = None) -> PauliString:
        """Parse ``"+1 X1 Z2"``, ``"-i Y3"`` or a bare letter string ``"XZ"``."""
        body = text.strip()
        power = 0
        m = re.match(r"^([+-])\s*([1i])\b", body)
        if m:
            power = {("+", "1"): 0, ("+", "i"): 1, ("-", "1"): 2, ("-", "i"): 3}[m.groups()]
            body = body[m.end():].strip()
        elif body[:1] in "+-":
            power = 0 if body[0] == "+" else 2
            body = body[1:].strip()
        if re.fullmatch(r"[IXYZ]+", body) and not re.search(r"\d", body):
            if n_qubits is not None and len(body) != n_qubits:
                raise DimensionError(f"{body!r} has {len(body)} letters, expected {n_qubits}")
            return cls(body, power)
        sites = {}
        for tok in body.split():
            tm = re.fullmatch(r"([IXYZ])(\d+)", tok)
            if tm is None:
                raise ValueError(f"cannot parse Pauli token {tok!r} in {text!r}")
            q = int(tm.group(2))
            if q in sites:
                raise ValueError(f"qubit {q} appears twice in {text!r}")
            sites[q] = tm.group(1)
        if not sites:
            raise ValueError(f"empty Pauli string {text!r}")
        n = n_qubits if n_qubits is not None else max(sites)
        return cls.from_sites(n, sites, power)

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return multiply(self, other)
        if isinstance(other, OperatorSum):
            return OperatorSum.from_pauli(self) * other
        if isinstance(other, (int, float, complex, np.number)):
            return OperatorSum.from_pauli(self) * other
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return OperatorSum.from_pauli(self) * other
        return NotImplemented

    def __neg__(self) -> PauliString:
        return PauliString(self.letters, self.power + 2)

    def __add__(self, other):
        return OperatorSum.from_pauli(self) + other

    def __sub__(self, other):
        return OperatorSum.from_pauli(self) - other

    def dagger(self) -> PauliString:
        return PauliString(self.letters, -self.power)

    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    def to_dense(self) -> np.ndarray:
        return self.phase * reduce(np.kron, (_SINGLE[c] for c in self.letters))

    def label(self) -> str:
        """Compact 1-based form without phase, e.g. ``"X1 Z2"``; ``"I"`` for identity."""
        parts = [f"{c}{k}" for k, c in enumerate(self.letters, start=1) if c != "I"]
        return " ".join(parts) if parts else "I"

    def __str__(self) -> str:
        sign = {0: "+1", 1: "+i", 2: "-1", 3: "-i"}[self.power]
        return f"{sign} {self.label()}"


def multiply(p: PauliString, q: PauliString) -> PauliString:
    """Exact group product ``p*q`` including the accumulated phase."""
    _check_same_size(p.n_qubits, q.n_qubits)
    power = p.power + q.power
    out = []
    for a, b in zip(p.letters, q.letters):
        c, k = _PRODUCT[(a, b)]
        out.append(c)
        power += k
    return PauliString("".join(out), power)


def anticommutes(p: PauliString, q: PauliString) -> bool:
    _check_same_size(p.n_qubits, q.n_qubits)
    clashes = sum(a != "I" and b != "I" and a != b for a, b in zip(p.letters, q.letters))
    return clashes % 2 == 1


def commutation_sign(p: PauliString, q: PauliString) -> int:
    """``+1`` if ``pq = qp``, ``-1`` if ``pq = -qp``."""
    return -1 if anticommutes(p, q) else 1


Scalar = Union[int, float, complex, np.number]


def _letter_key(letters: str) -> tuple[int, ...]:
    return tuple(LETTERS.index(c) for c in letters)


class OperatorSum:
    """Complex-weighted sum of phase-free Pauli strings in canonical form.

    Terms are stored sorted by letter order ``I < X < Y < Z`` with string
    phases folded into the coefficients; exactly-zero (below ``1e-14``)
    coefficients are dropped. Instances are treated as immutable.
    """

    __slots__ = ("n_qubits", "_terms")
    ZERO_TOL = 1e-14

    def __init__(self, n_qubits: int, terms: Mapping[str, Scalar] | None = None):
        if n_qubits < 1:
            raise ValueError("n_qubits must be positive")
        acc: dict[str, complex] = {}
        for letters, c in (terms or {}).items():
            if len(letters) != n_qubits:
                raise DimensionError(f"term {letters!r} does not act on {n_qubits} qubits")
            PauliString(letters)  # validates letters
            acc[letters] = acc.get(letters, 0) + complex(c)
        self.n_qubits = n_qubits
        self._terms = tuple(
            (k, acc[k]) for k in sorted(acc, key=_letter_key) if abs(acc[k]) > self.ZERO_TOL
        )

    @classmethod
    def from_pauli(cls, p: PauliString, coeff: Scalar = 1.0) -> OperatorSum:
        return cls(p.n_qubits, {p.letters: coeff * p.phase})

    @classmethod
    def zero(cls, n_qubits: int) -> OperatorSum:
        return cls(n_qubits)

    @classmethod
    def identity(cls, n_qubits: int) -> OperatorSum:
        return cls(n_qubits, {"I" * n_qubits: 1.0})

    @classmethod
    def from_terms(cls, n_qubits: int, pairs: Iterable[tuple[Union[str, PauliString], Scalar]]) -> OperatorSum:
        out = cls.zero(n_qubits)
        for p, c in pairs:
            if isinstance(p, str):
                p = PauliString.parse(p, n_qubits)
            out = out + cls.from_pauli(p, c)
        return out

    @classmethod
    def parse(cls, text: str, n_qubits: int | None = None) -> OperatorSum:
        return parse_operator(text, n_qubits)

    @property
    def terms(self) -> dict[str, complex]:
        return dict(self._terms)

    def items(self):
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, PauliString):
            other = OperatorSum.from_pauli(other)
        if not isinstance(other, OperatorSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def __hash__(self):
        return hash((self.n_qubits, self._terms))

    def allclose(self, other: OperatorSum, atol: float = 1e-12) -> bool:
        diff = self - other
        return all(abs(c) <= atol for _, c in diff.items())

    def _coerce(self, other) -> OperatorSum:
        if isinstance(other, PauliString):
            other = OperatorSum.from_pauli(other)
        if not isinstance(other, OperatorSum):
            raise TypeError(f"cannot combine OperatorSum with {type(other).__name__}")
        _check_same_size(self.n_qubits, other.n_qubits)
        return other

    def __add__(self, other) -> OperatorSum:
        if isinstance(other, (int, float, complex, np.number)):
            other = OperatorSum.identity(self.n_qubits) * other
        other = self._coerce(other)
        acc = dict(self._terms)
        for k, c in other.items():
            acc[k] = acc.get(k, 0) + c
        return OperatorSum(self.n_qubits, acc)

    __radd__ = __add__

    def __neg__(self) -> OperatorSum:
        return OperatorSum(self.n_qubits, {k: -c for k, c in self._terms})

    def __sub__(self, other) -> OperatorSum:
        if isinstance(other, (int, float, complex, np.number)):
            return self + (-other)
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> OperatorSum:
        return (-self) + other

    def __mul__(self, other) -> OperatorSum:
        if isinstance(other, (int, float, complex, np.number)):
            return OperatorSum(self.n_qubits, {k: c * other for k, c in self._terms})
        other = self._coerce(other)
        acc: dict[str, complex] = {}
        for ka, ca in self._terms:
            pa = PauliString(ka)
            for kb, cb in other.items():
                prod = multiply(pa, PauliString(kb))
                acc[prod.letters] = acc.get(prod.letters, 0) + ca * cb * prod.phase
        return OperatorSum(self.n_qubits, acc)

    def __rmul__(self, other) -> OperatorSum:
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return self._coerce(other) * self

    def __truediv__(self, other: Scalar) -> OperatorSum:
        return self * (1.0 / other)

    def dagger(self) -> OperatorSum:
        return OperatorSum(self.n_qubits, {k: np.conj(c) for k, c in self._terms})

    def commutator(self, other) -> OperatorSum:
        other = self._coerce(other)
        return self * other - other * self

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for _, c in self._terms)

    def norm(self) -> float:
        """Normalized Hilbert-Schmidt norm, ``sqrt(sum |c|^2)``."""
        return float(np.sqrt(sum(abs(c) ** 2 for _, c in self._terms)))

    def to_dense(self) -> np.ndarray:
        return to_dense(self)

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "terms": {k: [c.real, c.imag] for k, c in self._terms},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> OperatorSum:
        terms = {k: complex(v[0], v[1]) for k, v in data["terms"].items()}
        return cls(int(data["n_qubits"]), terms)

    def __repr__(self) -> str:
        if not self._terms:
            return f"OperatorSum({self.n_qubits}, 0)"
        body = " + ".join(f"({c:.6g})*({PauliString(k).label()})" for k, c in self._terms)
        return f"OperatorSum({self.n_qubits}, {body})"


OperatorLike = Union[OperatorSum, PauliString, np.ndarray]


def to_dense(a: OperatorLike) -> np.ndarray:
    """Dense matrix of an operator; arrays pass through as complex copies."""
    if isinstance(a, np.ndarray):
        return np.array(a, dtype=complex)
    if isinstance(a, PauliString):
        return a.to_dense()
    dim = 2 ** a.n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for k, c in a.items():
        out += c * PauliString(k).to_dense()
    return out


def exp_hermitian(h: OperatorLike, theta: float) -> np.ndarray:
    """``exp(-i theta H)`` via Hermitian eigendecomposition."""
    if isinstance(h, PauliString):
        if h.power % 2:
            raise ValueError("Pauli string with imaginary phase is not Hermitian")
        h = OperatorSum.from_pauli(h)
    if isinstance(h, OperatorSum):
        if not h.is_hermitian():
            raise ValueError("exp_hermitian needs real coefficients (Hermitian operator)")
        mat = to_dense(h)
    else:
        mat = np.asarray(h, dtype=complex)
        if not np.allclose(mat, mat.conj().T, atol=1e-12):
            raise ValueError("exp_hermitian needs a Hermitian matrix")
    mat = 0.5 * (mat + mat.conj().T)
    w, v = np.linalg.eigh(mat)
    return (v * np.exp(-1j * theta * w)) @ v.conj().T


def global_phase(a: np.ndarray, b: np.ndarray) -> complex:
    """Unit phase ``z`` maximizing overlap so that ``b ~ z a``; 1 if orthogonal."""
    ov = np.vdot(a, b)
    return ov / abs(ov) if abs(ov) > 1e-300 else 1.0 + 0j


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-10) -> bool:
    """True if ``b = z a`` for some unit complex ``z``.

    For unitaries this is equivalent to ``|tr(A^dag B)|/dim = 1``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape:
        return False
    z = global_phase(a, b)
    return bool(np.linalg.norm(z * a - b) <= atol * max(1.0, np.linalg.norm(a)))


def phase_overlap(a: np.ndarray, b: np.ndarray) -> float:
    """``|tr(A^dag B)| / dim``."""
    return float(abs(np.vdot(a, b)) / a.shape[0])


def is_unitary(u: np.ndarray, atol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(
        u.conj().T @ u, np.eye(u.shape[0]), atol=atol)


# -- text parsing ------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?j?|j)"
    r"|(?P<site>[IXYZ]\d+)"
    r"|(?P<bare>[IXYZ]+)"
    r"|(?P<op>[-+*/()])"
    r")"
)


def _tokenize(text: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"unexpected character at column {pos + 1} in {text!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


def parse_operator(text: str, n_qubits: int | None = None) -> OperatorSum:
    """Parse sums like ``"0.5*(X1 X2) + 0.5*(Y1 Y2)"`` or ``"(Z1 - Z2)/2"``.

    Grammar: ``expr := ['+'|'-'] term (('+'|'-') term)*``;
    ``term := factor (('*'|'/') factor)*``; a factor is a number, a group of
    site tokens such as ``X1 Z3``, a bare letter string like ``XZ``, or a
    parenthesized expression.
    """
    toks = _tokenize(text)
    sites_seen = [int(v[1:]) for k, v in toks if k == "site"]
    bare_lens = [len(v) for k, v in toks if k == "bare" and v != "I"]
    n = n_qubits
    if n is None:
        n = max(sites_seen + bare_lens + [1])
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def take():
        nonlocal pos
        pos += 1
        return toks[pos - 1]

    def expr() -> OperatorSum:
        acc = OperatorSum.zero(n)
        sign = 1.0
        k, v = peek()
        if k == "op" and v in "+-":
            take()
            sign = -1.0 if v == "-" else 1.0
        acc = acc + term() * sign
        while True:
            k, v = peek()
            if k == "op" and v in "+-":
                take()
                acc = acc + term() * (-1.0 if v == "-" else 1.0)
            else:
                return acc

    def term():
        val = factor()
        while True:
            k, v = peek()
            if k == "op" and v == "*":
                take()
                rhs = factor()
                val = _times(val, rhs)
            elif k == "op" and v == "/":
                take()
                rhs = factor()
                if not isinstance(rhs, complex):
                    raise ValueError("can only divide by a number")
                val = _times(val, 1.0 / rhs)
            elif k in ("num", "site", "bare") or (k == "op" and v == "("):
                # implicit product, e.g. "-1 X1 Z2" or "0.5 (X1 X2)"
                val = _times(val, factor())
            else:
                return val

    def factor():
        k, v = peek()
        if k == "num":
            take()
            return complex(1j if v == "j" else complex(v))
        if k == "op" and v == "(":
            take()
            inner = expr()
            k2, v2 = take() if pos < len(toks) else (None, None)
            if v2 != ")":
                raise ValueError(f"missing ')' in {text!r}")
            return inner
        if k == "op" and v == "-":
            take()
            return _times(factor(), -1.0)
        if k == "bare":
            take()
            if v == "I":
                return OperatorSum.identity(n)
            return OperatorSum.from_pauli(PauliString.parse(v, n))
        if k == "site":
            words = []
            while peek()[0] == "site":
                words.append(take()[1])
            return OperatorSum.from_pauli(PauliString.parse(" ".join(words), n))
        raise ValueError(f"unexpected token {v!r} in {text!r}")

    result = expr()
    if pos != len(toks):
        raise ValueError(f"trailing input {toks[pos][1]!r} in {text!r}")
    return _times(result, 1.0)


def _times(a, b):
    if isinstance(a, complex) and isinstance(b, complex):
        return a * b
    if isinstance(a, complex):
        return b * a
    return a * b
