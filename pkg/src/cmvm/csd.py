"""Canonical signed digit recoding and power-of-two matrix normalization."""

from dataclasses import dataclass
from fractions import Fraction

from .fxp import dyadic_parts


@dataclass(frozen=True)
class CsdScalar:
    """Signed-digit form of a scalar: ordered (power, sign) pairs, low to high.

    No two digits sit at adjacent powers and the digit count is minimal over
    all signed-digit representations.
    """

    digits: tuple[tuple[int, int], ...]

    def reconstruct(self) -> Fraction:
        return sum((Fraction(s) * Fraction(2) ** p for p, s in self.digits), Fraction(0))

    def __len__(self):
        return len(self.digits)


def to_csd(value) -> CsdScalar:
    """Recode an exact dyadic scalar into canonical signed digit form."""
    m, e = dyadic_parts(value)
    digits = []
    p = 0
    while m:
        if m & 1:
            u = 1 if m & 3 == 1 else -1
            digits.append((p + e, u))
            m -= u
        m >>= 1
        p += 1
    return CsdScalar(tuple(digits))


def nnz_int(n: int) -> int:
    """Nonzero digit count of the CSD form of an integer."""
    if n < 0:
        n = -n
    # positions where n and 3n disagree are exactly the CSD digit positions
    return (n ^ (3 * n)).bit_count()


def nnz_csd(vector) -> int:
    """Total CSD digit count over a vector of exact scalars."""
    total = 0
    for v in vector:
        m, _ = dyadic_parts(v)
        total += nnz_int(m)
    return total


@dataclass(frozen=True)
class Normalization:
    """Row/column power-of-two factor extraction.

    original[i][j] == normalized[i][j] * 2**(row_shifts[i] + col_shifts[j]),
    and in `normalized` every nonzero row and column has an odd entry.
    `normalized` entries are plain integers.
    """

    row_shifts: tuple[int, ...]
    col_shifts: tuple[int, ...]
    normalized: tuple[tuple[int, ...], ...]


def normalize(matrix) -> Normalization:
    """Pull the largest power-of-two factor out of each row, then each column.

    A second row pass is unnecessary: dividing a column by two cannot make an
    odd row entry even. All-zero rows/columns keep shift 0.
    """
    rows = [[Fraction(v) for v in row] for row in matrix]
    if not rows:
        raise ValueError("matrix must be nonempty")
    n_cols = len(rows[0])
    for row in rows:
        if len(row) != n_cols:
            raise ValueError("ragged matrix")

    def exp_of(v: Fraction) -> int | None:
        if v == 0:
            return None
        _, e = dyadic_parts(v)
        return e

    row_shifts = []
    for row in rows:
        exps = [exp_of(v) for v in row if v != 0]
        row_shifts.append(min(exps) if exps else 0)
    scaled = [
        [v / Fraction(2) ** r for v in row] for row, r in zip(rows, row_shifts)
    ]
    col_shifts = []
    for j in range(n_cols):
        exps = [exp_of(scaled[i][j]) for i in range(len(rows)) if scaled[i][j] != 0]
        col_shifts.append(min(exps) if exps else 0)
    normalized = tuple(
        tuple(int(scaled[i][j] / Fraction(2) ** col_shifts[j]) for j in range(n_cols))
        for i in range(len(rows))
    )
    return Normalization(tuple(row_shifts), tuple(col_shifts), normalized)


@dataclass(frozen=True)
class CsdTensor:
    """Sparse {-1, 0, 1} digit tensor of a matrix: (row, col, power) -> sign."""

    rows: int
    cols: int
    digits: dict

    @property
    def band(self) -> tuple[int, int]:
        """(min_power, max_power) over stored digits; (0, 0) when empty."""
        if not self.digits:
            return 0, 0
        powers = [p for (_, _, p) in self.digits]
        return min(powers), max(powers)

    @property
    def band_width(self) -> int:
        lo, hi = self.band
        return hi - lo + 1 if self.digits else 0


def matrix_to_tensor(normalized) -> CsdTensor:
    """CSD-recode every entry of an integer matrix into a digit tensor."""
    digits = {}
    n_rows = len(normalized)
    n_cols = len(normalized[0]) if n_rows else 0
    for j, row in enumerate(normalized):
        for i, v in enumerate(row):
            for p, s in to_csd(v).digits:
                digits[(j, i, p)] = s
    return CsdTensor(n_rows, n_cols, digits)
