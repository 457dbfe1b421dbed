"""Built-in example systems and the JSON system-file format.

fig1a and fig1b are reconstructions consistent with the captions of the two
classic pictures (three ratio-1/2 similitudes, six ratio-1/3 similitudes);
the exact placements are not published, so these are stand-ins.
"""
from __future__ import annotations

import cmath
import json
import math
import re

import numpy as np

from .geometry import AffineMap
from .system import NecklaceSystem, SystemSpecError

ALPHA_MAX = math.sqrt(3.0) / 6.0
EX21_BIG = (1, 7, 13, 19)


def fig1a() -> NecklaceSystem:
    """Sierpinski gasket on the unit-side triangle (0, 1, e^{iπ/3})."""
    verts = [0j, 1 + 0j, cmath.exp(1j * math.pi / 3)]
    maps = [AffineMap.from_complex(0.5, v / 2) for v in verts]
    return NecklaceSystem(maps, name="fig1a",
                          description="Sierpinski gasket; reconstruction consistent with a "
                                      "3-map ratio-1/2 caption")


def fig1b() -> NecklaceSystem:
    """Hexagasket: f_k(z) = z/3 + (2/3) e^{iπk/3}, k = 1..6."""
    maps = [AffineMap.from_complex(1 / 3, 2 / 3 * cmath.exp(1j * math.pi * k / 3))
            for k in range(1, 7)]
    return NecklaceSystem(maps, name="fig1b",
                          description="hexagasket; reconstruction consistent with a "
                                      "6-map ratio-1/3 caption")


def _ex21_constraints():
    """The 24 gluing constraints as (outer word, point, outer word, point)."""
    i = 1j
    cons = [((24,), 1, (1, 13), i), ((1, 13), 1, (2,), i),
            ((6,), 1 + i, (7, 19), 0), ((7, 19), 1 + i, (8,), 0),
            ((12,), i, (13, 1), 1), ((13, 1), i, (14,), 1),
            ((18,), 0, (19, 7), 1 + i), ((19, 7), 0, (20,), 1 + i)]
    cons += [((j,), 1 + i, (j + 1,), 0) for j in (2, 4, 9, 11)]
    cons += [((j,), 1, (j + 1,), i) for j in (3, 5, 20, 22)]
    cons += [((j,), i, (j + 1,), 1) for j in (8, 10, 15, 17)]
    cons += [((j,), 0, (j + 1,), 1 + i) for j in (14, 16, 21, 23)]
    return cons


def ex21_ratios() -> np.ndarray:
    return np.array([1 / 3 if j in EX21_BIG else 1 / 15 for j in range(1, 25)])


def _linear_form(word, p, s):
    """f_word(p) = coef . a + const, for maps z -> s_j z + a_j."""
    coef = np.zeros(len(s), dtype=complex)
    const = complex(p)
    for d in reversed(word):
        coef = coef * s[d - 1]
        coef[d - 1] += 1
        const = const * s[d - 1]
    return coef, const


def solve_ex21(tol: float = 1e-12) -> np.ndarray:
    """Translations a_1..a_24 of the 24-map system.

    The constraints only fix the a_j up to a common translation, so one extra
    row pins the fixed point of f_1 o f_13 (the cut point) at (1+i)/4, which
    puts the attractor in the unit square.
    """
    s = ex21_ratios()
    rows, rhs = [], []
    for w1, p1, w2, p2 in _ex21_constraints():
        c1, k1 = _linear_form(w1, p1, s)
        c2, k2 = _linear_form(w2, p2, s)
        rows.append(c1 - c2)
        rhs.append(k2 - k1)
    pin = np.zeros(24, dtype=complex)
    pin[0], pin[12] = 1.0, s[0]
    rows.append(pin)
    rhs.append((1 - s[0] * s[12]) * (1 + 1j) / 4)
    A, b = np.array(rows), np.array(rhs)
    a = np.linalg.lstsq(A, b, rcond=None)[0]
    residual = float(np.max(np.abs(A @ a - b)))
    if residual > tol:
        raise ArithmeticError(f"constraint residual {residual:g} exceeds {tol:g}")
    return a


def ex21() -> NecklaceSystem:
    s = ex21_ratios()
    a = solve_ex21()
    maps = [AffineMap.from_complex(s[j], a[j]) for j in range(24)]
    return NecklaceSystem(maps, name="ex21",
                          description="24-map self-similar necklace of bounded ramification "
                                      "with the cut point (1+i)/4")


def ex23L() -> NecklaceSystem:
    # f_3 uses translation 1: with 2/3 the copies F_1 and F_2 would be disjoint
    r = 1 / math.sqrt(3)
    maps = [AffineMap.from_complex(r * cmath.exp(1j * math.pi / 6), 0, conjugate=True),
            AffineMap.from_complex(1 / 3, 1 / 3),
            AffineMap.from_complex(r * cmath.exp(5j * math.pi / 6), 1)]
    return NecklaceSystem(maps, name="ex23L",
                          description="stable, bounded ramification, not good")


def ex23R(alpha: float = 0.2) -> NecklaceSystem:
    alpha = float(alpha)
    if not 0.0 < alpha < ALPHA_MAX:
        raise ValueError(f"alpha must lie in (0, sqrt(3)/6 = {ALPHA_MAX:.6f}), got {alpha}")
    g1 = AffineMap(0.5, 0.0, 0.0, alpha / 2)
    flip = AffineMap(0.5, 0.0, 0.0, -alpha / 2)  # conj(g_1(z))

    def after(w: complex, shift: complex, inner: AffineMap) -> AffineMap:
        return AffineMap.from_complex(w, shift) @ inner

    rot120, rot60 = cmath.exp(2j * math.pi / 3), cmath.exp(1j * math.pi / 3)
    s3 = math.sqrt(3)
    maps = [g1, after(1, 0.5, g1), after(rot120, 1, g1),
            after(rot120, (3 + 1j * s3) / 4, g1), after(rot60, (1 + 1j * s3) / 4, flip),
            after(rot60, 0, flip)]
    return NecklaceSystem(maps, name="ex23R", parameters={"alpha": alpha},
                          description="good self-affine necklace, unbounded ramification")


BUILTINS = {"fig1a": fig1a, "fig1b": fig1b, "ex21": ex21, "ex23L": ex23L, "ex23R": ex23R}
_PARAM = re.compile(r"^(\w+?)(?:[(:=]\s*([-+0-9.eE]+)\s*\)?)?$")


def builtin(name: str, alpha: float | None = None) -> NecklaceSystem:
    """Look up a built-in; ``ex23R(0.25)`` or ``ex23R:0.25`` sets alpha."""
    m = _PARAM.match(name.strip())
    if not m or m.group(1) not in BUILTINS:
        raise KeyError(f"unknown built-in {name!r}; choose from {', '.join(BUILTINS)}")
    key, arg = m.group(1), m.group(2)
    if key == "ex23R":
        if arg is not None:
            alpha = float(arg)
        return ex23R(0.2 if alpha is None else alpha)
    if arg is not None:
        raise ValueError(f"built-in {key} takes no parameter")
    return BUILTINS[key]()


# --------------------------------------------------------------------------
# system files

def _number(value, index, fld):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SystemSpecError(f"expected a number, got {value!r}", index, fld)
    if not math.isfinite(value):
        raise SystemSpecError("non-finite number", index, fld)
    return float(value)


def system_from_dict(data: dict, compute_nodes: bool = True) -> NecklaceSystem:
    if not isinstance(data, dict):
        raise SystemSpecError("top level must be an object")
    dim = data.get("dimension", 2)
    if dim != 2:
        raise SystemSpecError(f"unsupported dimension {dim!r}; only 2 is supported",
                              field="dimension")
    raw = data.get("maps")
    if not isinstance(raw, list):
        raise SystemSpecError("'maps' must be a list", field="maps")
    maps = []
    for i, entry in enumerate(raw, start=1):
        if not isinstance(entry, dict):
            raise SystemSpecError("map entry must be an object", i)
        mat = entry.get("matrix")
        if (not isinstance(mat, list) or len(mat) != 2
                or not all(isinstance(r, list) and len(r) == 2 for r in mat)):
            raise SystemSpecError("matrix must be [[a, b], [c, d]]", i, "matrix")
        tr = entry.get("translation", [0, 0])
        if not isinstance(tr, list) or len(tr) != 2:
            raise SystemSpecError("translation must be [tx, ty]", i, "translation")
        (a, b), (c, d) = ([_number(v, i, "matrix") for v in row] for row in mat)
        tx, ty = (_number(v, i, "translation") for v in tr)
        maps.append(AffineMap(a, b, c, d, tx, ty))
    params = data.get("parameters") or {}
    if not isinstance(params, dict):
        raise SystemSpecError("'parameters' must be an object", field="parameters")
    system = NecklaceSystem(maps, name=str(data.get("name", "")),
                            description=str(data.get("description", "")), parameters=params)
    if compute_nodes:
        system.raw_nodes  # surfaces NodeAmbiguityError at load time
    return system


def parse_system_file(text: str, compute_nodes: bool = True) -> NecklaceSystem:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemSpecError(f"invalid JSON: {exc}") from None
    return system_from_dict(data, compute_nodes)


def serialize(system: NecklaceSystem) -> str:
    return json.dumps(system.to_dict(), indent=2, ensure_ascii=False) + "\n"


def load_system(ref: str, compute_nodes: bool = True) -> NecklaceSystem:
    """A built-in name or a path to a system file."""
    try:
        return builtin(ref)
    except KeyError:
        pass
    try:
        with open(ref, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SystemSpecError(f"{ref!r} is neither a built-in nor a readable file ({exc.strerror})")
    return parse_system_file(text, compute_nodes)
