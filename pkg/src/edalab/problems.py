"""Bit-string benchmark problems: onemax, concatenated traps, NK landscapes, HIFF.

All fitness functions are maximized and deterministic. Genotypes are 1-D
numpy uint8 arrays of 0/1; batches are 2-D arrays with one genotype per row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InstanceFormatError

BRUTE_FORCE_MAX_N = 24
GENERATOR_OPTIMUM_MAX_N = 20

_BRUTE_FORCE_CHUNK = 1 << 14


@dataclass(frozen=True)
class ProblemInstance:
    """A benchmark instance with a pure fitness evaluator.

    kind is one of "onemax", "trap", "nk", "hiff". k is the trap block size
    or the NK neighborhood size (None otherwise). For NK instances,
    neighbors[i] holds k distinct variable indices != i and payoffs[i] the
    2**(k+1) payoff entries indexed by the bit pattern (bit_i, bit_j1, ...,
    bit_jk) read as a big-endian integer.
    """

    kind: str
    n: int
    k: int | None = None
    neighbors: np.ndarray | None = None
    payoffs: np.ndarray | None = None
    known_optimum: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")
        if self.kind == "onemax":
            pass
        elif self.kind == "trap":
            if self.k is None or self.k < 1:
                raise ValueError("trap requires a block size k >= 1")
            if self.n % self.k != 0:
                raise ValueError(f"trap requires n divisible by k, got n={self.n}, k={self.k}")
        elif self.kind == "hiff":
            if self.n & (self.n - 1) != 0:
                raise ValueError(f"hiff requires n to be a power of two, got {self.n}")
        elif self.kind == "nk":
            self._validate_nk()
        else:
            raise ValueError(f"unknown problem kind {self.kind!r}")

    def _validate_nk(self):
        if self.k is None or not (1 <= self.k < self.n):
            raise ValueError(f"nk requires 1 <= k < n, got n={self.n}, k={self.k}")
        if self.neighbors is None or self.payoffs is None:
            raise InstanceFormatError("nk instance needs neighbor lists and payoff tables")
        if self.neighbors.shape != (self.n, self.k):
            raise InstanceFormatError(
                f"neighbor table shape {self.neighbors.shape}, expected {(self.n, self.k)}")
        if self.payoffs.shape != (self.n, 2 ** (self.k + 1)):
            raise InstanceFormatError(
                f"payoff table shape {self.payoffs.shape}, expected {(self.n, 2 ** (self.k + 1))}")
        for i in range(self.n):
            row = self.neighbors[i]
            if len(set(row.tolist())) != self.k or i in row or row.min() < 0 or row.max() >= self.n:
                raise InstanceFormatError(
                    f"variable {i}: neighbors must be {self.k} distinct indices != {i} in [0, {self.n})")


def one_max(n: int) -> ProblemInstance:
    return ProblemInstance(kind="onemax", n=n, known_optimum=float(n))


def concat_trap(n: int, k: int = 5) -> ProblemInstance:
    return ProblemInstance(kind="trap", n=n, k=k, known_optimum=float(n))


def hiff(n: int) -> ProblemInstance:
    opt = float(n * (int(math.log2(n)) + 1))
    return ProblemInstance(kind="hiff", n=n, known_optimum=opt)


def nk_landscape(neighbors: np.ndarray, payoffs: np.ndarray,
                 known_optimum: float | None = None) -> ProblemInstance:
    n, k = neighbors.shape
    return ProblemInstance(kind="nk", n=n, k=k,
                           neighbors=np.asarray(neighbors, dtype=np.int64),
                           payoffs=np.asarray(payoffs, dtype=np.float64),
                           known_optimum=known_optimum)


def evaluate_batch(instance: ProblemInstance, batch: np.ndarray) -> np.ndarray:
    """Fitness of every row of `batch`; shape (B, n) in, (B,) float64 out."""
    batch = np.asarray(batch)
    if batch.ndim != 2 or batch.shape[1] != instance.n:
        raise ValueError(
            f"batch shape {batch.shape} does not match problem n={instance.n}")
    if instance.kind == "onemax":
        return batch.sum(axis=1).astype(np.float64)
    if instance.kind == "trap":
        k = instance.k
        unitation = batch.reshape(batch.shape[0], -1, k).sum(axis=2)
        block = np.where(unitation == k, k, k - 1 - unitation)
        return block.sum(axis=1).astype(np.float64)
    if instance.kind == "hiff":
        total = np.full(batch.shape[0], instance.n, dtype=np.float64)
        level = batch.astype(np.int64)
        width = 1
        while level.shape[1] > 1:
            left = level[:, 0::2]
            right = level[:, 1::2]
            # a block is homogeneous iff both halves are and agree; -1 marks mixed
            level = np.where((left == right) & (left >= 0), left, -1)
            width *= 2
            total += (level >= 0).sum(axis=1) * float(width)
        return total
    if instance.kind == "nk":
        return _evaluate_nk(instance, batch)
    raise ValueError(f"unknown problem kind {instance.kind!r}")


def _evaluate_nk(instance: ProblemInstance, batch: np.ndarray) -> np.ndarray:
    n, k = instance.n, instance.k
    bits = batch.astype(np.int64)
    pattern = bits.copy()
    for m in range(k):
        pattern = (pattern << 1) | bits[:, instance.neighbors[:, m]]
    try:
        contrib = instance.payoffs[np.arange(n)[None, :], pattern]
    except IndexError as exc:
        raise InstanceFormatError(f"payoff table index out of range: {exc}") from exc
    # accumulate variable by variable so a single row sums in the same order
    # as a plain sequential loop, keeping results bit-identical to one
    total = contrib[:, 0].copy()
    for i in range(1, n):
        total += contrib[:, i]
    return total


def evaluate(instance: ProblemInstance, genotype: np.ndarray) -> float:
    """Fitness of one genotype (higher is better)."""
    genotype = np.asarray(genotype)
    if genotype.shape != (instance.n,):
        raise ValueError(
            f"genotype shape {genotype.shape} does not match problem n={instance.n}")
    return float(evaluate_batch(instance, genotype[None, :])[0])


def _int_range_to_bits(start: int, stop: int, n: int) -> np.ndarray:
    values = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((values[:, None] >> shifts) & 1).astype(np.uint8)


def brute_force_optimum(instance: ProblemInstance) -> tuple[float, np.ndarray]:
    """Exhaustive global maximum; ties go to the lowest binary value.

    Genotypes are enumerated as big-endian integers 0 .. 2**n - 1, so the
    all-zeros string wins any tie. Guarded at n <= 24.
    """
    if instance.n > BRUTE_FORCE_MAX_N:
        raise CapacityError(
            f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got n={instance.n}")
    best_value = -np.inf
    best_bits = None
    total = 1 << instance.n
    for start in range(0, total, _BRUTE_FORCE_CHUNK):
        stop = min(start + _BRUTE_FORCE_CHUNK, total)
        chunk = _int_range_to_bits(start, stop, instance.n)
        values = evaluate_batch(instance, chunk)
        idx = int(np.argmax(values))
        if values[idx] > best_value:
            best_value = float(values[idx])
            best_bits = chunk[idx].copy()
    return best_value, best_bits


def generate_nk_instance(n: int, k: int, seed: int) -> ProblemInstance:
    """Random NK instance: uniform neighbor sets, payoffs i.i.d. U[0,1).

    Deterministic in seed. known_optimum is filled by brute force when
    n <= 20, otherwise left unset.
    """
    if not 1 <= k < n:
        raise ValueError(f"nk generation requires 1 <= k < n, got n={n}, k={k}")
    rng = np.random.default_rng(seed)
    neighbors = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        others = np.delete(np.arange(n, dtype=np.int64), i)
        neighbors[i] = rng.choice(others, size=k, replace=False)
    payoffs = rng.random((n, 2 ** (k + 1)))
    instance = nk_landscape(neighbors, payoffs)
    if n <= GENERATOR_OPTIMUM_MAX_N:
        value, _ = brute_force_optimum(instance)
        instance = nk_landscape(neighbors, payoffs, known_optimum=value)
    return instance


def save_nk_instance(instance: ProblemInstance, path) -> None:
    if instance.kind != "nk":
        raise ValueError("only nk instances have a file form")
    lines = [f"nk {instance.n} {instance.k}"]
    for i in range(instance.n):
        fields = [str(i)] + [str(int(j)) for j in instance.neighbors[i]]
        fields += [format(v, ".17g") for v in instance.payoffs[i]]
        lines.append(" ".join(fields))
    if instance.known_optimum is not None:
        lines.append(f"optimum {format(instance.known_optimum, '.17g')}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_nk_instance(path) -> ProblemInstance:
    """Parse the line-oriented NK text format; '#' lines are comments.

    The stated optimum, when present, is stored as-is; checking it against
    brute force is the verify tool's job, not the loader's.
    """
    with open(path, encoding="utf-8") as fh:
        raw = fh.readlines()
    rows = [(ln, line.strip()) for ln, line in enumerate(raw, start=1)
            if line.strip() and not line.strip().startswith("#")]
    if not rows:
        raise InstanceFormatError(f"{path}: empty instance file")

    ln, header = rows[0]
    parts = header.split()
    if len(parts) != 3 or parts[0] != "nk":
        raise InstanceFormatError(f"{path}: line {ln}: expected header 'nk <n> <k>'")
    try:
        n, k = int(parts[1]), int(parts[2])
    except ValueError as exc:
        raise InstanceFormatError(f"{path}: line {ln}: non-integer n/k: {exc}") from exc
    if not 1 <= k < n:
        raise InstanceFormatError(f"{path}: line {ln}: need 1 <= k < n, got n={n}, k={k}")

    table_width = 2 ** (k + 1)
    neighbors = np.empty((n, k), dtype=np.int64)
    payoffs = np.empty((n, table_width), dtype=np.float64)
    known_optimum = None
    var_rows = rows[1:]
    if len(var_rows) < n:
        raise InstanceFormatError(f"{path}: expected {n} variable lines, found {len(var_rows)}")
    for i, (ln, line) in enumerate(var_rows[:n]):
        fields = line.split()
        if len(fields) != 1 + k + table_width:
            raise InstanceFormatError(
                f"{path}: line {ln}: expected {1 + k + table_width} fields, got {len(fields)}")
        try:
            idx = int(fields[0])
            neigh = [int(f) for f in fields[1:1 + k]]
            values = [float(f) for f in fields[1 + k:]]
        except ValueError as exc:
            raise InstanceFormatError(f"{path}: line {ln}: {exc}") from exc
        if idx != i:
            raise InstanceFormatError(f"{path}: line {ln}: variable index {idx}, expected {i}")
        neighbors[i] = neigh
        payoffs[i] = values

    trailing = var_rows[n:]
    if len(trailing) > 1:
        raise InstanceFormatError(f"{path}: line {trailing[1][0]}: unexpected trailing content")
    if trailing:
        ln, line = trailing[0]
        fields = line.split()
        if len(fields) != 2 or fields[0] != "optimum":
            raise InstanceFormatError(f"{path}: line {ln}: expected 'optimum <value>'")
        try:
            known_optimum = float(fields[1])
        except ValueError as exc:
            raise InstanceFormatError(f"{path}: line {ln}: {exc}") from exc

    try:
        return nk_landscape(neighbors, payoffs, known_optimum=known_optimum)
    except InstanceFormatError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc


def random_population(instance: ProblemInstance, count: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Uniform random genotype batch of shape (count, n)."""
    return rng.integers(0, 2, size=(count, instance.n), dtype=np.uint8)
