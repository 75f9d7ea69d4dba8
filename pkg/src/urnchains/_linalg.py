"""Exact rational matrix helpers: products, Kronecker products, linear solves.

Matrices are tuples of row tuples of Fractions, indexed (source, target);
composition "f then g" is the plain product f @ g.  Products skip zero
entries, which matters because equaliser and permutation matrices here are
very sparse.
"""

from __future__ import annotations

from fractions import Fraction

Matrix = tuple

ZERO = Fraction(0)
ONE = Fraction(1)


class LinearSolveError(Exception):
    """The linear system has no solution or is not uniquely solvable."""


def frac(x) -> Fraction:
    """Coerce to an exact Fraction; floats go through their decimal repr.

    Fraction(str(0.1)) is 1/10, which is what a human writing 0.1 in a JSON
    file meant; Fraction(0.1) would be the 56-bit binary artefact.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(str(x))
    raise TypeError(f"cannot coerce {type(x).__name__} to Fraction")


def as_matrix(rows) -> Matrix:
    return tuple(tuple(frac(v) for v in row) for row in rows)


def identity(n: int) -> Matrix:
    return tuple(
        tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)
    )


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a and b and len(a[0]) != len(b):
        raise ValueError(f"shape mismatch: {len(a)}x{len(a[0])} @ {len(b)}x{len(b[0])}")
    ncols = len(b[0]) if b else 0
    out = []
    for arow in a:
        acc = [ZERO] * ncols
        for t, v in enumerate(arow):
            if v:
                brow = b[t]
                for u, w in enumerate(brow):
                    if w:
                        acc[u] += v * w
        out.append(tuple(acc))
    return tuple(out)


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product, matching row-major product index order."""
    rows = []
    for arow in a:
        for brow in b:
            rows.append(
                tuple(av * bv if av and bv else ZERO for av in arow for bv in brow)
            )
    return tuple(rows)


def max_abs_diff(a: Matrix, b: Matrix) -> Fraction:
    if len(a) != len(b) or (a and len(a[0]) != len(b[0])):
        raise ValueError("shape mismatch in max_abs_diff")
    dev = ZERO
    for ra, rb in zip(a, b):
        for x, y in zip(ra, rb):
            d = abs(x - y)
            if d > dev:
                dev = d
    return dev


def solve_right(e: Matrix, b: Matrix) -> Matrix:
    """Solve m @ e = b for m, requiring the solution to be unique.

    e must have full row rank (it is a split mono in every use here); raises
    LinearSolveError when the system is inconsistent or underdetermined.
    Gaussian elimination over exact rationals on the transposed system.
    """
    nrows_e = len(e)
    ncols_e = len(e[0]) if e else 0
    if b and len(b[0]) != ncols_e:
        raise ValueError("right-hand side width must match e")
    q = len(b)
    # augmented system: e^T x = b^T, solved for all q right-hand sides at once
    aug = [
        [e[j][i] for j in range(nrows_e)] + [b[r][i] for r in range(q)]
        for i in range(ncols_e)
    ]
    pivot_rows: list[int] = []
    row = 0
    for col in range(nrows_e):
        piv = None
        for r in range(row, len(aug)):
            if aug[r][col]:
                piv = r
                break
        if piv is None:
            raise LinearSolveError(
                f"underdetermined system: matrix has row rank < {nrows_e}"
            )
        aug[row], aug[piv] = aug[piv], aug[row]
        pv = aug[row][col]
        if pv != 1:
            aug[row] = [v / pv for v in aug[row]]
        prow = aug[row]
        for r in range(len(aug)):
            if r != row and aug[r][col]:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], prow)]
        pivot_rows.append(row)
        row += 1
    # consistency: rows below the pivots must be entirely zero
    for r in range(row, len(aug)):
        if any(aug[r]):
            raise LinearSolveError("inconsistent system: no exact factorisation exists")
    sol_t = [aug[r][nrows_e:] for r in range(nrows_e)]
    return tuple(tuple(sol_t[j][r] for j in range(nrows_e)) for r in range(q))
