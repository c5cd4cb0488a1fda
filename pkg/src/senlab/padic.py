"""Fixed-precision arithmetic in Q_p and its finite extensions.

Every field is Q_p[X]/(P) for a monic integral defining polynomial P whose
root theta generates the ring of integers.  An element is stored as integer
coordinates on the basis 1, theta, ..., theta^(d-1) over a common power of p:

    x = p^(-shift) * sum(coeffs[i] * theta^i)

with every coordinate reduced modulo p^(N + shift) and shift kept minimal.
Precision is absolute: N counts powers of p, so an element is known modulo
p^N O_K whatever its valuation.  Valuations are normalized by val(p) = 1.
"""

import logging
import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from sympy import Poly, Symbol, cyclotomic_poly, isprime
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_from_int_poly, gf_gcdex, gf_irreducible_p

from .errors import (
    ConvergenceViolation,
    DivisionByZeroToPrecision,
    InvalidField,
    LevelMismatch,
    MixedFields,
    UnsupportedField,
    ZeroArgument,
)
from .models import FieldKind


logger = logging.getLogger(__name__)

_X = Symbol("x")

Scalar = Union["PadicScalar", int, Fraction]


class AtLeast(Fraction):
    """Valuation of an element that is zero to working precision.

    Compares like the precision bound itself, so ``min`` over valuations keeps
    working, while ``isinstance(v, AtLeast)`` tells a lower bound from an
    exact value.
    """

    def __repr__(self) -> str:
        return f"AtLeast({Fraction(self)})"

    def __str__(self) -> str:
        return f">={Fraction(self)}"


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def ilog(k: int, p: int) -> int:
    """Largest j with p^j <= k, for k >= 1."""
    j = 0
    while k >= p:
        k //= p
        j += 1
    return j


def factorial_valuation(k: int, p: int) -> int:
    """v_p(k!) by Legendre's formula."""
    total = 0
    while k:
        k //= p
        total += k
    return total


def _is_eisenstein(coeffs: Sequence[int], p: int) -> bool:
    """coeffs low-to-high, monic."""
    if coeffs[-1] != 1:
        return False
    if any(c % p for c in coeffs[:-1]):
        return False
    return coeffs[0] % (p * p) != 0


def _irreducible_mod_p(coeffs: Sequence[int], p: int) -> bool:
    dense = gf_from_int_poly([int(c) for c in reversed(coeffs)], p)
    if len(dense) != len(coeffs):
        return False
    return bool(gf_irreducible_p(dense, p, ZZ))


@lru_cache(maxsize=None)
def _cyclotomic_moduli(p: int, level: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Phi_{p^m}(X) and Phi_{p^m}(1 + X), both low-to-high."""
    poly = Poly(cyclotomic_poly(p ** level, _X), _X)
    shifted = poly.shift(1)
    modulus = tuple(int(c) for c in reversed(poly.all_coeffs()))
    eisenstein = tuple(int(c) for c in reversed(shifted.all_coeffs()))
    return modulus, eisenstein


def default_unramified_polynomial(p: int, degree: int) -> Tuple[int, ...]:
    """Smallest monic polynomial of the given degree that is irreducible mod p."""
    if degree < 1:
        raise InvalidField(f"unramified degree must be positive, got {degree}")
    if degree == 1:
        return (0, 1)
    for code in range(p ** degree):
        lower = []
        for _ in range(degree):
            lower.append(code % p)
            code //= p
        candidate = tuple(lower) + (1,)
        if _irreducible_mod_p(candidate, p):
            return candidate
    raise InvalidField(f"no irreducible polynomial of degree {degree} mod {p}")


@dataclass(frozen=True)
class FieldDescriptor:
    """A finite extension K of Q_p at fixed absolute precision.

    ``precision`` counts powers of p: elements are known modulo p^precision.
    Measured in powers of the uniformizer that is ``uniformizer_precision``,
    e times as many digits.

    Two descriptors are equal when they describe the same field at the same
    precision; operands must share one to be combined.
    """

    p: int
    kind: FieldKind
    precision: int
    level: int = 0
    polynomial: Tuple[int, ...] = ()
    modulus: Tuple[int, ...] = field(init=False, repr=False, compare=False)
    e: int = field(init=False, repr=False, compare=False)
    f: int = field(init=False, repr=False, compare=False)
    eisenstein: Optional[Tuple[int, ...]] = field(init=False, repr=False, compare=False)
    _tail: Tuple[Tuple[int, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p = self.p
        if not isinstance(p, int) or p < 2 or not isprime(p):
            raise InvalidField(f"{p} is not prime")
        if self.precision < 1:
            raise InvalidField(f"precision must be at least 1, got {self.precision}")

        eisenstein = None
        if self.kind is FieldKind.BASE:
            modulus, e, f = (0, 1), 1, 1
        elif self.kind is FieldKind.CYCLOTOMIC:
            if self.level < 1:
                raise InvalidField(f"cyclotomic level must be at least 1, got {self.level}")
            modulus, eisenstein = _cyclotomic_moduli(p, self.level)
            if not _is_eisenstein(eisenstein, p):
                raise InvalidField(f"Phi_{p ** self.level}(1+X) is not Eisenstein")
            e, f = (p - 1) * p ** (self.level - 1), 1
        else:
            modulus = tuple(int(c) for c in self.polynomial)
            if len(modulus) < 2 or modulus[-1] != 1:
                raise InvalidField(f"defining polynomial must be monic of positive degree: {modulus}")
            degree = len(modulus) - 1
            if _irreducible_mod_p(modulus, p):
                e, f = 1, degree
            elif self.kind is FieldKind.USER and _is_eisenstein(modulus, p):
                e, f = degree, 1
                eisenstein = modulus
            elif self.kind is FieldKind.UNRAMIFIED:
                raise InvalidField(f"{modulus} is not irreducible mod {p}")
            else:
                raise InvalidField(f"{modulus} is neither irreducible mod {p} nor Eisenstein")

        tail = tuple((j, c) for j, c in enumerate(modulus[:-1]) if c)
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "e", e)
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "eisenstein", eisenstein)
        object.__setattr__(self, "_tail", tail)

    # -- structure ---------------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.modulus) - 1

    @property
    def residue_cardinality(self) -> int:
        return self.p ** self.f

    @property
    def uniformizer_precision(self) -> int:
        """Absolute precision in powers of the uniformizer."""
        return self.e * self.precision

    @property
    def is_ramified(self) -> bool:
        return self.e > 1

    def same_extension(self, other: "FieldDescriptor") -> bool:
        """True when both describe the same field, ignoring precision."""
        return (self.p, self.kind, self.level, self.polynomial) == (
            other.p, other.kind, other.level, other.polynomial)

    def with_precision(self, precision: int) -> "FieldDescriptor":
        """Same field at another absolute precision."""
        if precision == self.precision:
            return self
        return make_field(self.p, self.kind, precision, self.level, self.polynomial)

    def base(self) -> "FieldDescriptor":
        """Q_p at the same precision."""
        return base_field(self.p, self.precision)

    def to_dict(self) -> dict:
        """Convert to dictionary for JSON serialization."""
        return {
            "p": self.p,
            "kind": self.kind.value,
            "precision": self.precision,
            "level": self.level,
            "polynomial": list(self.polynomial),
            "uniformizer_precision": self.uniformizer_precision,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "FieldDescriptor":
        """Create from dictionary (JSON deserialization).

        The precision may be given in powers of p as "precision" or in
        powers of the uniformizer as "uniformizer_precision"; the latter is
        rounded up to whole powers of p.
        """
        p = int(data["p"])
        kind = FieldKind(data.get("kind", "base"))
        level = int(data.get("level", 0))
        polynomial = tuple(int(c) for c in data.get("polynomial", ()))
        if "precision" in data:
            precision = int(data["precision"])
        else:
            e = make_field(p, kind, 1, level, polynomial).e
            precision = precision_from_uniformizer_digits(int(data["uniformizer_precision"]), e)
        return make_field(p, kind, precision, level, polynomial)

    # -- elements ----------------------------------------------------------

    def __call__(self, value: Scalar) -> "PadicScalar":
        """Coerce an integer, a rational or a base-field scalar into this field."""
        if isinstance(value, PadicScalar):
            return self.coerce(value)
        if isinstance(value, bool):
            value = int(value)
        if isinstance(value, int):
            return PadicScalar(self, [value])
        if isinstance(value, Fraction):
            if value.denominator == 1:
                return PadicScalar(self, [value.numerator])
            a = vp(value.denominator, self.p)
            unit = value.denominator // self.p ** a
            mod = self.p ** (self.precision + a)
            return PadicScalar(self, [value.numerator * pow(unit, -1, mod)], a)
        raise TypeError(f"cannot coerce {type(value).__name__} into {self}")

    def coerce(self, x: "PadicScalar") -> "PadicScalar":
        """Move x into this field: same extension at any precision, or Q_p inside."""
        if x.parent is self:
            return x
        if x.parent.same_extension(self):
            return PadicScalar(self, x.coeffs, x.shift)
        if x.parent.kind is FieldKind.BASE and x.parent.p == self.p:
            return PadicScalar(self, [x.coeffs[0]], x.shift)
        raise MixedFields(f"cannot coerce an element of {x.parent} into {self}")

    def element(self, coords: Iterable[Scalar]) -> "PadicScalar":
        """Element with the given coordinates on the theta-power basis."""
        total = self.zero()
        gen_power = self.one()
        theta = self.gen()
        for c in coords:
            if c:
                total = total + self(c) * gen_power
            gen_power = gen_power * theta
        return total

    def zero(self) -> "PadicScalar":
        return PadicScalar(self, [0])

    def one(self) -> "PadicScalar":
        return PadicScalar(self, [1])

    def gen(self) -> "PadicScalar":
        """Root theta of the defining polynomial (zeta for cyclotomic fields)."""
        if self.degree == 1:
            return PadicScalar(self, [-self.modulus[0]])
        return PadicScalar(self, [0, 1])

    def uniformizer(self) -> "PadicScalar":
        """zeta - 1 for cyclotomic fields, theta for Eisenstein ones, p otherwise."""
        if self.kind is FieldKind.CYCLOTOMIC:
            return PadicScalar(self, [-1, 1])
        if self.eisenstein is not None:
            return self.gen()
        return PadicScalar(self, [self.p])

    def uniformizer_inverse(self) -> "PadicScalar":
        return _uniformizer_inverse(self)

    def random_element(self, rng, valuation: int = 0) -> "PadicScalar":
        """Uniform integral element scaled by p^valuation."""
        mod = self.p ** self.precision
        coords = [rng.randrange(mod) for _ in range(self.degree)]
        return PadicScalar(self, coords, -valuation)

    def random_unit(self, rng) -> "PadicScalar":
        while True:
            x = self.random_element(rng)
            if x.valuation() == 0:
                return x

    def from_text(self, text: str) -> "PadicScalar":
        """Parse the canonical digit-list form produced by ``PadicScalar.to_text``."""
        return _parse_text(self, text)


def precision_from_uniformizer_digits(digits: int, e: int) -> int:
    """Smallest precision in powers of p carrying ``digits`` powers of a uniformizer of index e."""
    if digits < 1:
        raise InvalidField(f"precision must be at least 1, got {digits}")
    return -(-digits // e)


@lru_cache(maxsize=None)
def make_field(p: int, kind: FieldKind, precision: int, level: int = 0,
               polynomial: Tuple[int, ...] = ()) -> FieldDescriptor:
    """Cached constructor; equal parameters share one descriptor."""
    return FieldDescriptor(p, kind, precision, level, tuple(polynomial))


def base_field(p: int, precision: int) -> FieldDescriptor:
    return make_field(p, FieldKind.BASE, precision)


def cyclotomic_field(p: int, level: int, precision: int) -> FieldDescriptor:
    return make_field(p, FieldKind.CYCLOTOMIC, precision, level)


def unramified_field(p: int, degree_or_polynomial: Union[int, Sequence[int]],
                     precision: int) -> FieldDescriptor:
    """Unramified extension from a degree (default polynomial) or an explicit polynomial."""
    if isinstance(degree_or_polynomial, int):
        if degree_or_polynomial == 1:
            return base_field(p, precision)
        polynomial = default_unramified_polynomial(p, degree_or_polynomial)
    else:
        polynomial = tuple(int(c) for c in degree_or_polynomial)
    return make_field(p, FieldKind.UNRAMIFIED, precision, 0, polynomial)


def user_field(p: int, polynomial: Sequence[int], precision: int) -> FieldDescriptor:
    return make_field(p, FieldKind.USER, precision, 0, tuple(int(c) for c in polynomial))


def _reduce_mod(cs: List[int], parent: FieldDescriptor) -> List[int]:
    """Reduce a coefficient list (low-to-high) modulo the monic defining polynomial."""
    d = parent.degree
    tail = parent._tail
    for i in range(len(cs) - 1, d - 1, -1):
        c = cs[i]
        if c:
            offset = i - d
            for j, mj in tail:
                cs[offset + j] -= c * mj
    del cs[d:]
    return cs


def _pi_coordinates(coeffs: Sequence[int], mod: int) -> List[int]:
    """Coordinates on powers of (zeta - 1) from coordinates on powers of zeta."""
    d = len(coeffs)
    out = [0] * d
    for j, c in enumerate(coeffs):
        if not c:
            continue
        for i in range(j + 1):
            out[i] += c * math.comb(j, i)
    return [c % mod for c in out]


class PadicScalar:
    """An element of a field descriptor, known modulo p^N.

    Instances are immutable; arithmetic returns new elements in the same
    parent.  Mixing parents raises MixedFields.
    """

    __slots__ = ("parent", "coeffs", "shift", "_val")

    def __init__(self, parent: FieldDescriptor, coeffs: Sequence[int], shift: int = 0):
        p = parent.p
        d = parent.degree
        cs = list(coeffs)
        if len(cs) > d:
            cs = _reduce_mod(cs, parent)
        elif len(cs) < d:
            cs.extend([0] * (d - len(cs)))
        if shift < 0:
            scale = p ** (-shift)
            cs = [c * scale for c in cs]
            shift = 0
        mod = p ** (parent.precision + shift)
        cs = [c % mod for c in cs]
        while shift > 0 and all(c % p == 0 for c in cs):
            cs = [c // p for c in cs]
            shift -= 1
        if not any(cs):
            shift = 0
        self.parent = parent
        self.coeffs = tuple(cs)
        self.shift = shift
        self._val = None

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_unit(self) -> bool:
        return not self.is_zero() and self.valuation() == 0

    def is_integral(self) -> bool:
        return self.shift == 0

    def valuation(self) -> Fraction:
        """val(x) normalized by val(p) = 1; AtLeast(N) for x zero to precision."""
        if self._val is None:
            self._val = self._compute_valuation()
        return self._val

    def _compute_valuation(self) -> Fraction:
        parent = self.parent
        if self.is_zero():
            return AtLeast(parent.precision)
        p = parent.p
        if parent.eisenstein is None:
            # theta-power basis of an unramified field is a unit basis
            return Fraction(min(vp(c, p) for c in self.coeffs if c)) - self.shift
        if parent.kind is FieldKind.CYCLOTOMIC:
            coords = _pi_coordinates(self.coeffs, p ** (parent.precision + self.shift))
        else:
            coords = self.coeffs
        e = parent.e
        best = min(Fraction(vp(c, p)) + Fraction(i, e) for i, c in enumerate(coords) if c)
        return best - self.shift

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "PadicScalar":
        if isinstance(other, PadicScalar):
            if other.parent is not self.parent and other.parent != self.parent:
                raise MixedFields(f"{self.parent} vs {other.parent}")
            return other
        if isinstance(other, (int, Fraction)):
            return self.parent(other)
        return NotImplemented

    def __add__(self, other) -> "PadicScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        s1, s2 = self.shift, other.shift
        p = self.parent.p
        if s1 == s2:
            cs = [a + b for a, b in zip(self.coeffs, other.coeffs)]
        elif s1 > s2:
            k = p ** (s1 - s2)
            cs = [a + b * k for a, b in zip(self.coeffs, other.coeffs)]
        else:
            k = p ** (s2 - s1)
            cs = [a * k + b for a, b in zip(self.coeffs, other.coeffs)]
        return PadicScalar(self.parent, cs, max(s1, s2))

    __radd__ = __add__

    def __neg__(self) -> "PadicScalar":
        return PadicScalar(self.parent, [-c for c in self.coeffs], self.shift)

    def __sub__(self, other) -> "PadicScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "PadicScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other) -> "PadicScalar":
        if isinstance(other, int) and not isinstance(other, bool):
            return PadicScalar(self.parent, [c * other for c in self.coeffs], self.shift)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self.coeffs, other.coeffs
        d = len(a)
        if d == 1:
            return PadicScalar(self.parent, [a[0] * b[0]], self.shift + other.shift)
        prod = [0] * (2 * d - 1)
        nonzero_b = [(j, bj) for j, bj in enumerate(b) if bj]
        for i, ai in enumerate(a):
            if ai:
                for j, bj in nonzero_b:
                    prod[i + j] += ai * bj
        return PadicScalar(self.parent, prod, self.shift + other.shift)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "PadicScalar":
        if isinstance(other, int) and not isinstance(other, bool):
            return self.divide_by_int(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other) -> "PadicScalar":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other * self.inverse()

    def __pow__(self, k: int) -> "PadicScalar":
        if k < 0:
            return self.inverse() ** (-k)
        result = self.parent.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def scale_p(self, k: int) -> "PadicScalar":
        """Multiply by p^k exactly (k may be negative)."""
        return PadicScalar(self.parent, self.coeffs, self.shift - k)

    def divide_by_int(self, n: int) -> "PadicScalar":
        """Exact division by a nonzero integer."""
        if n == 0:
            raise DivisionByZeroToPrecision("division by the integer 0")
        p = self.parent.p
        a = vp(n, p)
        unit = n // p ** a
        mod = p ** (self.parent.precision + self.shift + a)
        inv = pow(unit, -1, mod)
        return PadicScalar(self.parent, [c * inv for c in self.coeffs], self.shift + a)

    def inverse(self) -> "PadicScalar":
        """Multiplicative inverse via a residue inverse and Newton iteration."""
        parent = self.parent
        if self.is_zero():
            raise DivisionByZeroToPrecision(f"divisor is zero to precision {parent.precision}")
        v = self.valuation()
        a = math.floor(v)
        b = int((v - a) * parent.e)
        y = self.scale_p(-a)
        if b:
            y = y * parent.uniformizer_inverse() ** b
        z = _residue_inverse(y)
        one = parent.one()
        limit = 2 * (parent.e * (parent.precision + 2)).bit_length() + 4
        for _ in range(limit):
            r = one - y * z
            if r.is_zero():
                break
            z = z + z * r
        else:
            logger.warning(f"Newton inverse did not settle in {limit} steps for {self!r}")
        z = z.scale_p(-a)
        if b:
            z = z * parent.uniformizer_inverse() ** b
        return z

    def with_precision(self, precision: int) -> "PadicScalar":
        """The same value in the same field at another precision."""
        return PadicScalar(self.parent.with_precision(precision), self.coeffs, self.shift)

    # -- comparison and display --------------------------------------------

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.parent(other)
        if not isinstance(other, PadicScalar):
            return NotImplemented
        if other.parent != self.parent:
            return False
        return self.coeffs == other.coeffs and self.shift == other.shift

    __hash__ = None

    def agrees_with(self, other: Scalar, digits: Union[int, Fraction]) -> bool:
        """True when val(self - other) >= digits."""
        return (self - other).valuation() >= digits

    def coordinates(self) -> List["PadicScalar"]:
        """Coordinates on the theta-power basis as Q_p scalars."""
        base = self.parent.base()
        return [PadicScalar(base, [c], self.shift) for c in self.coeffs]

    def to_text(self) -> str:
        p = self.parent.p
        width = self.parent.precision + self.shift
        digit_lists = []
        for c in self.coeffs:
            digits = []
            for _ in range(width):
                digits.append(c % p)
                c //= p
            digit_lists.append("[" + ",".join(str(d) for d in digits) + "]")
        body = digit_lists[0] if len(digit_lists) == 1 else "[" + ",".join(digit_lists) + "]"
        return f"{body}@v{self.valuation()}"

    def __str__(self) -> str:
        return self.to_text()

    def __repr__(self) -> str:
        return f"PadicScalar({self.to_text()})"


_TEXT_RE = re.compile(r"^\s*(\[.*\])\s*@v\s*(>=)?\s*(-?\d+(?:/\d+)?)\s*$")


def _parse_text(parent: FieldDescriptor, text: str) -> PadicScalar:
    match = _TEXT_RE.match(text)
    if not match:
        raise ValueError(f"not a canonical p-adic digit list: {text!r}")
    body = match.group(1).replace(" ", "")
    if body.startswith("[["):
        groups = re.findall(r"\[([0-9,]*)\]", body[1:-1])
    else:
        groups = [body[1:-1]]
    if len(groups) != parent.degree:
        raise ValueError(f"expected {parent.degree} digit lists, got {len(groups)}")
    p = parent.p
    coords = []
    width = None
    for group in groups:
        digits = [int(d) for d in group.split(",") if d != ""]
        if any(d < 0 or d >= p for d in digits):
            raise ValueError(f"digit out of range for p={p} in {text!r}")
        if width is None:
            width = len(digits)
        elif width != len(digits):
            raise ValueError(f"ragged digit lists in {text!r}")
        coords.append(sum(d * p ** i for i, d in enumerate(digits)))
    shift = (width or parent.precision) - parent.precision
    if shift < 0:
        raise ValueError(f"{width} digits cannot carry precision {parent.precision}")
    x = PadicScalar(parent, coords, shift)
    stated = Fraction(match.group(3))
    if not x.is_zero() and x.valuation() != stated:
        raise ValueError(f"stated valuation {stated} does not match digits (got {x.valuation()})")
    return x


def _residue_inverse(y: PadicScalar) -> PadicScalar:
    """Element whose residue inverts the residue of the unit y."""
    parent = y.parent
    p = parent.p
    scale = p ** y.shift
    if parent.kind is FieldKind.CYCLOTOMIC:
        residue = (sum(y.coeffs) // scale) % p
        return PadicScalar(parent, [pow(residue, -1, p)])
    if parent.f == 1:
        residue = (y.coeffs[0] // scale) % p
        return PadicScalar(parent, [pow(residue, -1, p)])
    reduced = gf_from_int_poly([c // scale for c in reversed(y.coeffs)], p)
    modulus = gf_from_int_poly(list(reversed(parent.modulus)), p)
    s, _, h = gf_gcdex(reduced, modulus, p, ZZ)
    if h != [1]:
        raise DivisionByZeroToPrecision(f"residue of {y!r} is not invertible")
    return PadicScalar(parent, [int(c) for c in reversed(s)])


@lru_cache(maxsize=None)
def _uniformizer_inverse(parent: FieldDescriptor) -> PadicScalar:
    """pi^(-1) = -Q(pi) / P(0) where P(X) = X*Q(X) + P(0) is Eisenstein in pi."""
    if parent.eisenstein is None:
        return PadicScalar(parent, [1], 1)
    work = parent.with_precision(parent.precision + 1)
    pi = work.uniformizer()
    coeffs = parent.eisenstein
    acc = work.zero()
    for c in reversed(coeffs[1:]):
        acc = acc * pi + c
    inv = -acc * work(Fraction(1, coeffs[0]))
    return PadicScalar(parent, inv.coeffs, inv.shift)


# -- Galois action ---------------------------------------------------------


@dataclass(frozen=True)
class GaloisElement:
    """An element of Gal(K/Q_p) for a Galois field descriptor.

    For cyclotomic fields (and Q_p) the exponent is the cyclotomic character
    value chi(g), a unit mod p^N; on level m it acts by zeta -> zeta^(chi mod p^m).
    For unramified fields the exponent is a power of Frobenius.
    """

    parent: FieldDescriptor
    exponent: int

    def __post_init__(self):
        parent = self.parent
        if parent.kind is FieldKind.USER:
            raise UnsupportedField("user fields carry no Galois data")
        if parent.kind is FieldKind.UNRAMIFIED:
            object.__setattr__(self, "exponent", self.exponent % parent.f)
            return
        modulus = parent.p ** parent.precision
        exponent = self.exponent % modulus
        if exponent % parent.p == 0:
            raise InvalidField(f"character value {self.exponent} is not a p-adic unit")
        object.__setattr__(self, "exponent", exponent)

    def __mul__(self, other: "GaloisElement") -> "GaloisElement":
        if not self.parent.same_extension(other.parent):
            raise MixedFields(f"{self.parent} vs {other.parent}")
        if self.parent.kind is FieldKind.UNRAMIFIED:
            return GaloisElement(self.parent, self.exponent + other.exponent)
        return GaloisElement(self.parent, self.exponent * other.exponent)

    def __pow__(self, k: int) -> "GaloisElement":
        if self.parent.kind is FieldKind.UNRAMIFIED:
            return GaloisElement(self.parent, self.exponent * k)
        modulus = self.parent.p ** self.parent.precision
        return GaloisElement(self.parent, pow(self.exponent, k, modulus))

    def __call__(self, x: PadicScalar) -> PadicScalar:
        return galois_act(self, x)

    def chi(self) -> PadicScalar:
        """Cyclotomic character value as a Q_p scalar."""
        if self.parent.kind is FieldKind.UNRAMIFIED:
            raise UnsupportedField("no cyclotomic character on an unramified field")
        return self.parent.base()(self.exponent)

    def order(self) -> int:
        """Order of the restriction to K."""
        parent = self.parent
        if parent.kind is FieldKind.UNRAMIFIED:
            return parent.f // math.gcd(self.exponent, parent.f)
        if parent.kind is FieldKind.BASE:
            return 1
        modulus = parent.p ** parent.level
        a = self.exponent % modulus
        k, acc = 1, a
        while acc != 1:
            acc = acc * a % modulus
            k += 1
        return k


def galois_group(parent: FieldDescriptor) -> List[GaloisElement]:
    """All elements of Gal(K/Q_p), in increasing exponent order."""
    if parent.kind is FieldKind.UNRAMIFIED:
        return [GaloisElement(parent, k) for k in range(parent.f)]
    if parent.kind is FieldKind.CYCLOTOMIC:
        modulus = parent.p ** parent.level
        return [GaloisElement(parent, a) for a in range(1, modulus) if a % parent.p]
    if parent.kind is FieldKind.BASE:
        return [GaloisElement(parent, 1)]
    raise UnsupportedField("user fields carry no Galois data")


def _cyclotomic_image(x: PadicScalar, a: int) -> PadicScalar:
    parent = x.parent
    p, m = parent.p, parent.level
    pm = p ** m
    block = p ** (m - 1)
    e = parent.e
    out = [0] * e
    for j, c in enumerate(x.coeffs):
        if not c:
            continue
        t = (a * j) % pm
        if t < e:
            out[t] += c
        else:
            # zeta^t = -(sum of zeta^(t - e + k*block) for k < p-1)
            t0 = t - e
            for k in range(p - 1):
                out[t0 + k * block] -= c
    return PadicScalar(parent, out, x.shift)


@lru_cache(maxsize=None)
def _frobenius_root(parent: FieldDescriptor) -> PadicScalar:
    """The root of P congruent to theta^p, found by Newton iteration."""
    poly = parent.modulus
    derivative = [i * c for i, c in enumerate(poly)][1:]

    def horner(coeffs, x):
        acc = parent.zero()
        for c in reversed(coeffs):
            acc = acc * x + c
        return acc

    r = parent.gen() ** parent.p
    limit = 2 * parent.precision.bit_length() + 4
    for _ in range(limit):
        value = horner(poly, r)
        if value.is_zero():
            break
        r = r - value / horner(derivative, r)
    return r


def _apply_frobenius(x: PadicScalar) -> PadicScalar:
    parent = x.parent
    root = _frobenius_root(parent)
    acc = parent.zero()
    for c in reversed(x.coeffs):
        acc = acc * root + c
    return acc.scale_p(-x.shift)


def galois_act(g: GaloisElement, x: PadicScalar) -> PadicScalar:
    """sigma(x) for sigma in Gal(K/Q_p)."""
    parent = x.parent
    if parent.kind is FieldKind.USER:
        raise UnsupportedField("user fields carry no Galois data")
    if not g.parent.same_extension(parent):
        raise MixedFields(f"Galois element of {g.parent} applied to {parent}")
    if parent.kind is FieldKind.BASE:
        return x
    if parent.kind is FieldKind.CYCLOTOMIC:
        return _cyclotomic_image(x, g.exponent % parent.p ** parent.level)
    result = x
    for _ in range(g.exponent % parent.f):
        result = _apply_frobenius(result)
    return result


# -- tower operations ------------------------------------------------------


def normalized_trace(x: PadicScalar, n: int) -> PadicScalar:
    """Tate's normalized trace R_n: K_m -> K_n, returned in K_m.

    On the zeta-power basis it keeps the coefficient of zeta^j exactly when
    p^(m-n) divides j, so it is exact.
    """
    parent = x.parent
    if parent.kind is not FieldKind.CYCLOTOMIC:
        raise UnsupportedField("normalized traces need a cyclotomic field")
    m = parent.level
    if n < 1 or n > m:
        raise LevelMismatch(f"cannot trace level {m} down to level {n}")
    step = parent.p ** (m - n)
    coeffs = [c if j % step == 0 else 0 for j, c in enumerate(x.coeffs)]
    return PadicScalar(parent, coeffs, x.shift)


def conjugate_average(x: PadicScalar, n: int) -> PadicScalar:
    """(1/[K_m:K_n]) * sum of sigma_a(x) over a = 1 mod p^n, the definition of R_n."""
    parent = x.parent
    if parent.kind is not FieldKind.CYCLOTOMIC:
        raise UnsupportedField("normalized traces need a cyclotomic field")
    m = parent.level
    if n < 1 or n > m:
        raise LevelMismatch(f"cannot trace level {m} down to level {n}")
    p = parent.p
    total = parent.zero()
    for k in range(p ** (m - n)):
        total = total + _cyclotomic_image(x, 1 + k * p ** n)
    return total.divide_by_int(p ** (m - n))


def embed_from_level(x: PadicScalar, level: int) -> PadicScalar:
    """Image of x in K_level under zeta_{p^n} -> zeta_{p^level}^(p^(level-n))."""
    parent = x.parent
    if parent.kind is not FieldKind.CYCLOTOMIC:
        raise UnsupportedField("embedding between levels needs a cyclotomic field")
    n = parent.level
    if level < n:
        raise LevelMismatch(f"cannot embed level {n} into level {level}")
    target = cyclotomic_field(parent.p, level, parent.precision)
    step = parent.p ** (level - n)
    coeffs = [0] * target.degree
    for j, c in enumerate(x.coeffs):
        coeffs[j * step] = c
    return PadicScalar(target, coeffs, x.shift)


def field_norm(x: PadicScalar) -> PadicScalar:
    """N_{K/Q_p}(x) as a Q_p scalar, the product of all Galois conjugates."""
    parent = x.parent
    if parent.kind is FieldKind.BASE:
        return x
    if parent.kind is FieldKind.USER:
        raise UnsupportedField("user fields carry no Galois data")
    result = parent.one()
    for g in galois_group(parent):
        result = result * galois_act(g, x)
    return PadicScalar(parent.base(), [result.coeffs[0]], result.shift)


def teichmuller(x: PadicScalar) -> PadicScalar:
    """Teichmuller representative of the residue of an integral x (unramified fields)."""
    parent = x.parent
    if parent.is_ramified:
        raise UnsupportedField("Teichmuller lifts are implemented for unramified fields")
    if x.valuation() < 0:
        raise ValueError(f"{x!r} is not integral")
    if x.valuation() > 0:
        return parent.zero()
    q = parent.residue_cardinality
    y = x
    for _ in range(parent.precision + 2):
        nxt = y ** q
        if nxt == y:
            break
        y = nxt
    return y


def rational_reconstruction(x: PadicScalar, precision: Optional[int] = None) -> Fraction:
    """Smallest-height rational congruent to x modulo p^precision (Q_p only)."""
    parent = x.parent
    if parent.kind is not FieldKind.BASE:
        raise UnsupportedField("rational reconstruction works on Q_p scalars")
    precision = parent.precision if precision is None else precision
    p = parent.p
    modulus = p ** (precision + x.shift)
    c = x.coeffs[0] % modulus
    if c == 0:
        return Fraction(0)
    bound = math.isqrt(modulus // 2)
    r0, r1 = modulus, c
    s0, s1 = 0, 1
    while r1 > bound:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
    if r1 == 0 or s1 == 0 or abs(s1) > bound or math.gcd(s1, p) != 1:
        raise ValueError(f"{x!r} has no small rational reconstruction")
    return Fraction(r1, s1) / p ** x.shift


# -- analytic functions ----------------------------------------------------


def plog(x: PadicScalar) -> PadicScalar:
    """Iwasawa p-adic logarithm (log p = 0) at the precision of x.

    x = p^a * u with u a unit, reduced to a principal unit by powering, then the
    Mercator series runs at a lifted working precision and the result is cast
    back.
    """
    parent = x.parent
    if x.is_zero():
        raise ZeroArgument(f"log of an element zero to precision {parent.precision}")
    p = parent.p
    v = x.valuation()
    e = parent.e
    q = parent.residue_cardinality

    # q - 1 is prime to p, so only the ramification power costs digits
    k1 = 1 if e == 1 else e
    lost = vp(k1, p)
    estimate = (parent.precision + lost + 8) * e + 1
    guard = lost + ilog(estimate, p) + 2
    work = parent.with_precision(parent.precision + guard)

    xw = PadicScalar(work, x.coeffs, x.shift)
    if v == 0 and (xw - 1).valuation() > 0:
        w, k1 = xw, 1
    elif e == 1:
        w = xw.scale_p(-int(v))
    else:
        w = (xw ** e).scale_p(-int(v * e))
    if (w - 1).valuation() > 0:
        k2 = 1
    else:
        k2 = q - 1
        w = w ** k2

    divisor = k1 * k2
    y = w - 1
    if y.is_zero():
        return parent.zero()
    t = y.valuation()
    target = parent.precision + lost + 1

    total = work.zero()
    power = y
    k = 1
    while k * t < target + ilog(k, p):
        term = power.divide_by_int(k)
        total = total + term if k % 2 else total - term
        k += 1
        power = power * y
    logger.debug(f"plog: {k - 1} terms, guard {guard} digits, divisor {divisor}")
    result = total.divide_by_int(divisor)
    return PadicScalar(parent, result.coeffs, result.shift)


def exp_term_count(slope: Fraction, precision: int) -> int:
    """Terms needed so that k * slope >= precision + 1 for every later term."""
    return max(1, math.ceil((precision + 1) / slope))


def pexp(x: PadicScalar) -> PadicScalar:
    """Exponential series, defined for val(x) > 1/(p-1)."""
    parent = x.parent
    if x.is_zero():
        return parent.one()
    p = parent.p
    v = x.valuation()
    bound = Fraction(1, p - 1)
    if v <= bound:
        raise ConvergenceViolation(f"exp needs val(x) > {bound}, got {v}")
    terms = exp_term_count(v - bound, parent.precision)
    guard = factorial_valuation(terms, p) + 2
    work = parent.with_precision(parent.precision + guard)
    xw = PadicScalar(work, x.coeffs, x.shift)
    total = work.one()
    term = work.one()
    for k in range(1, terms + 1):
        term = (term * xw).divide_by_int(k)
        total = total + term
    logger.debug(f"pexp: {terms} terms, guard {guard} digits")
    return PadicScalar(parent, total.coeffs, total.shift)
