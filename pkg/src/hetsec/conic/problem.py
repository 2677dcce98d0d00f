"""Solver-agnostic conic program IR.

A :class:`ConicProblem` owns named variable blocks (real vectors, complex
vectors, Hermitian matrices), one linear objective, and a list of
constraints: linear equalities/inequalities, second-order cones
``||rows|| <= bound`` with affine rows, and PSD membership of Hermitian
blocks.  Everything is expressed over the real parameterization documented
in :mod:`hetsec.conic.embed`; the helpers below build real-valued affine
expressions from complex data so callers never touch the embedding.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .embed import hermitian_param_size


@dataclass(frozen=True)
class VarBlock:
    name: str
    kind: str  # "real" | "complex" | "hermitian"
    dim: int   # vector length, or matrix side for hermitian blocks

    @property
    def real_size(self) -> int:
        if self.kind == "real":
            return self.dim
        if self.kind == "complex":
            return 2 * self.dim
        if self.kind == "hermitian":
            return hermitian_param_size(self.dim)
        raise ValueError(f"unknown block kind {self.kind!r}")


class LinExpr:
    """Real-valued affine expression: sum over blocks of coeffs.params + offset."""

    __slots__ = ("terms", "offset")

    def __init__(self, terms: dict[str, np.ndarray] | None = None, offset: float = 0.0):
        self.terms = {k: np.asarray(v, dtype=float) for k, v in (terms or {}).items()}
        self.offset = float(offset)

    def copy(self) -> "LinExpr":
        return LinExpr({k: v.copy() for k, v in self.terms.items()}, self.offset)

    def __add__(self, other) -> "LinExpr":
        out = self.copy()
        if isinstance(other, LinExpr):
            for k, v in other.terms.items():
                out.terms[k] = out.terms.get(k, 0.0) + v
            out.offset += other.offset
        else:
            out.offset += float(other)
        return out

    __radd__ = __add__

    def __sub__(self, other) -> "LinExpr":
        return self + (other * -1.0 if isinstance(other, LinExpr) else -float(other))

    def __rsub__(self, other) -> "LinExpr":
        return (self * -1.0) + other

    def __mul__(self, c: float) -> "LinExpr":
        return LinExpr({k: v * c for k, v in self.terms.items()}, self.offset * c)

    __rmul__ = __mul__

    def __truediv__(self, c: float) -> "LinExpr":
        return self * (1.0 / c)

    def value(self, params: dict[str, np.ndarray]) -> float:
        acc = self.offset
        for name, coeffs in self.terms.items():
            acc += float(np.dot(coeffs, params[name]))
        return acc


def const(x: float) -> LinExpr:
    return LinExpr(offset=float(x))


def re_inner(c: np.ndarray, block: str) -> LinExpr:
    """Re(c^H w) over a complex block."""
    c = np.asarray(c, dtype=complex).ravel()
    coeffs = np.empty(2 * c.size)
    coeffs[0::2] = c.real
    coeffs[1::2] = c.imag
    return LinExpr({block: coeffs})


def im_inner(c: np.ndarray, block: str) -> LinExpr:
    """Im(c^H w) over a complex block."""
    c = np.asarray(c, dtype=complex).ravel()
    coeffs = np.empty(2 * c.size)
    coeffs[0::2] = -c.imag
    coeffs[1::2] = c.real
    return LinExpr({block: coeffs})


def complex_row(c: np.ndarray, block: str, offset: complex = 0.0) -> tuple[LinExpr, LinExpr]:
    """(Re, Im) affine pair of the C-linear scalar c.w + offset.

    Feeding both into a second-order cone reproduces |c.w + offset| in the
    norm, since |z|^2 = Re(z)^2 + Im(z)^2.
    """
    c = np.asarray(c, dtype=complex).ravel()
    re = np.empty(2 * c.size)
    re[0::2] = c.real
    re[1::2] = -c.imag
    im = np.empty(2 * c.size)
    im[0::2] = c.imag
    im[1::2] = c.real
    return (
        LinExpr({block: re}, offset=complex(offset).real),
        LinExpr({block: im}, offset=complex(offset).imag),
    )


def trace_inner(a: np.ndarray, block: str) -> LinExpr:
    """Tr(A X) for Hermitian coefficient A over a Hermitian block."""
    a = np.asarray(a, dtype=complex)
    d = a.shape[0]
    coeffs = np.empty(hermitian_param_size(d))
    pos = 0
    for j in range(d):
        for i in range(j):
            coeffs[pos] = 2.0 * a[i, j].real
            coeffs[pos + 1] = 2.0 * a[i, j].imag
            pos += 2
        coeffs[pos] = a[j, j].real
        pos += 1
    return LinExpr({block: coeffs})


def real_var(block: str, index: int = 0, size: int = 1) -> LinExpr:
    """The ``index``-th coordinate of a real block as an expression."""
    coeffs = np.zeros(size)
    coeffs[index] = 1.0
    return LinExpr({block: coeffs})


@dataclass(frozen=True)
class LinearConstraint:
    name: str
    expr: LinExpr  # expr == 0 (eq) or expr <= 0 (ineq)
    equality: bool


@dataclass(frozen=True)
class SocConstraint:
    name: str
    rows: tuple[LinExpr, ...]
    bound: LinExpr  # ||rows|| <= bound


@dataclass(frozen=True)
class PsdConstraint:
    name: str
    block: str


class ConicProblem:
    """Immutable-after-build conic program; see module docstring."""

    def __init__(self, name: str = "problem"):
        self.name = name
        self.blocks: dict[str, VarBlock] = {}
        self.constraints: list = []
        self.sense: str = "min"
        self.objective: LinExpr = LinExpr()

    # -- variables ---------------------------------------------------------
    def _register(self, block: VarBlock) -> str:
        if block.name in self.blocks:
            raise ValueError(f"duplicate block {block.name!r}")
        self.blocks[block.name] = block
        return block.name

    def add_real(self, name: str, dim: int = 1) -> str:
        return self._register(VarBlock(name, "real", dim))

    def add_complex(self, name: str, dim: int) -> str:
        return self._register(VarBlock(name, "complex", dim))

    def add_hermitian(self, name: str, dim: int) -> str:
        return self._register(VarBlock(name, "hermitian", dim))

    # -- objective / constraints -------------------------------------------
    def set_objective(self, sense: str, expr: LinExpr) -> None:
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self._check_expr(expr)
        self.sense = sense
        self.objective = expr

    def add_eq(self, name: str, expr: LinExpr) -> None:
        self._check_expr(expr)
        self.constraints.append(LinearConstraint(name, expr, equality=True))

    def add_ineq(self, name: str, expr: LinExpr) -> None:
        """expr <= 0."""
        self._check_expr(expr)
        self.constraints.append(LinearConstraint(name, expr, equality=False))

    def add_soc(self, name: str, rows, bound: LinExpr) -> None:
        """||rows|| <= bound with affine rows."""
        rows = tuple(rows)
        for r in rows:
            self._check_expr(r)
        self._check_expr(bound)
        self.constraints.append(SocConstraint(name, rows, bound))

    def add_quad_le(self, name: str, rows, bound: LinExpr) -> None:
        """sum of squared rows <= bound, via ||[rows, (g-1)/2]|| <= (g+1)/2."""
        rows = tuple(rows) + ((bound - 1.0) * 0.5,)
        self.add_soc(name, rows, (bound + 1.0) * 0.5)

    def add_psd(self, name: str, block: str) -> None:
        blk = self.blocks.get(block)
        if blk is None or blk.kind != "hermitian":
            raise ValueError(f"{block!r} is not a Hermitian block")
        self.constraints.append(PsdConstraint(name, block))

    def _check_expr(self, expr: LinExpr) -> None:
        for bname, coeffs in expr.terms.items():
            blk = self.blocks.get(bname)
            if blk is None:
                raise ValueError(f"expression references undeclared block {bname!r}")
            if coeffs.size != blk.real_size:
                raise ValueError(
                    f"coefficients for {bname!r} have size {coeffs.size}, "
                    f"expected {blk.real_size}"
                )

    # -- introspection -------------------------------------------------------
    def constraint(self, name: str):
        for c in self.constraints:
            if c.name == name:
                return c
        raise KeyError(name)

    def count(self, kind: type) -> int:
        return sum(isinstance(c, kind) for c in self.constraints)

    def dump(self) -> str:
        """Line-oriented text rendering, for debugging only."""
        lines = [f"problem {self.name} sense={self.sense}"]
        for b in self.blocks.values():
            lines.append(f"var {b.name} kind={b.kind} dim={b.dim}")

        def expr_str(e: LinExpr) -> str:
            parts = [f"{e.offset:+.12g}"]
            for k in sorted(e.terms):
                v = e.terms[k]
                nz = np.nonzero(v)[0]
                parts.extend(f"{v[i]:+.12g}*{k}[{i}]" for i in nz)
            return " ".join(parts)

        lines.append(f"objective {expr_str(self.objective)}")
        for c in self.constraints:
            if isinstance(c, LinearConstraint):
                op = "==" if c.equality else "<="
                lines.append(f"lin {c.name}: {expr_str(c.expr)} {op} 0")
            elif isinstance(c, SocConstraint):
                lines.append(f"soc {c.name}: bound {expr_str(c.bound)}")
                for r in c.rows:
                    lines.append(f"  row {expr_str(r)}")
            else:
                lines.append(f"psd {c.name}: {c.block} >= 0")
        return "\n".join(lines)
