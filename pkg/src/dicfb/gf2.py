"""GF(2) linear algebra on vectors packed into Python integers."""


class XorBasis:
    """Incremental basis with distinct leading bits, kept in descending order."""

    __slots__ = ("rows",)

    def __init__(self, rows=()):
        self.rows = []
        for r in rows:
            self.add(r)

    def reduce(self, v: int) -> int:
        for b in self.rows:
            v = min(v, v ^ b)
        return v

    def contains(self, v: int) -> bool:
        return self.reduce(v) == 0

    def add(self, v: int) -> bool:
        """Insert ``v``; return False if it was already in the span."""
        v = self.reduce(v)
        if v == 0:
            return False
        self.rows.append(v)
        self.rows.sort(reverse=True)
        return True

    def copy(self) -> "XorBasis":
        c = XorBasis()
        c.rows = list(self.rows)
        return c

    def canonical(self) -> tuple:
        """Reduced echelon form; equal exactly when the spans are equal."""
        rows = sorted(self.rows)
        for i in range(len(rows)):
            for k in range(i):
                if rows[i] >> (rows[k].bit_length() - 1) & 1:
                    rows[i] ^= rows[k]
        return tuple(rows)

    def __len__(self):
        return len(self.rows)


def rank(vectors) -> int:
    return len(XorBasis(vectors))


def left_inverse_rows(columns, nrows: int):
    """Rows of a left inverse of the matrix whose columns are ``columns``.

    ``columns`` are integers over ``nrows`` bit positions and must be
    linearly independent.  Returns one integer per column: row ``i``
    satisfies ``popcount(row_i & columns[j]) % 2 == (i == j)``.
    """
    k = len(columns)
    # Gauss-Jordan on the augmented k x (nrows + k) system A^T | I.
    aug = [(c, 1 << i) for i, c in enumerate(columns)]
    pivots = []
    for bit in reversed(range(nrows)):
        mask = 1 << bit
        piv = next((i for i in range(len(pivots), k) if aug[i][0] & mask), None)
        if piv is None:
            continue
        r = len(pivots)
        aug[r], aug[piv] = aug[piv], aug[r]
        pr = aug[r]
        for i in range(k):
            if i != r and aug[i][0] & mask:
                aug[i] = (aug[i][0] ^ pr[0], aug[i][1] ^ pr[1])
        pivots.append(bit)
        if len(pivots) == k:
            break
    if len(pivots) < k:
        raise ValueError("columns are linearly dependent")
    # Row r of the reduced A^T has a single pivot bit; the combination of
    # original columns producing it gives the inverse.
    inv = [0] * k
    for r, bit in enumerate(pivots):
        combo = aug[r][1]
        for j in range(k):
            if combo >> j & 1:
                inv[j] |= 1 << bit
    return inv


def parity(x: int) -> int:
    return bin(x).count("1") & 1
