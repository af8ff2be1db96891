"""Dense operator algebra on labeled multipartite spaces.

Every operator carries an ordered layout of ``(label, dim)`` pairs, so that
partial transposes, partial traces and reorderings are addressed by name
instead of by axis position.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-9
PSD_TOL = 1e-9

__all__ = [
    "Layout",
    "LabeledOperator",
    "PureState",
    "identity",
    "flip_operator",
    "max_entangled_vector",
    "max_entangled_projector",
    "kron",
    "permute_subsystems",
    "partial_transpose",
    "partial_trace",
    "hermitian_spectrum",
    "is_psd",
    "haar_unitary",
    "sample_states",
    "schmidt_coefficients",
    "operator_to_json",
    "operator_from_json",
    "state_to_json",
    "state_from_json",
]


class Layout(tuple):
    """Ordered, label-unique sequence of ``(label, dim)`` pairs."""

    def __new__(cls, entries: Iterable[tuple[str, int]]):
        entries = tuple((str(lab), int(dim)) for lab, dim in entries)
        labels = [lab for lab, _ in entries]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate subsystem labels in {labels}")
        for lab, dim in entries:
            if dim < 1:
                raise ValueError(f"subsystem {lab!r} has non-positive dimension {dim}")
        return super().__new__(cls, entries)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self)

    @property
    def total(self) -> int:
        return prod(self.dims)

    def index(self, label: str) -> int:  # type: ignore[override]
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown subsystem label {label!r}; layout has {self.labels}") from None

    def indices(self, labels: Iterable[str]) -> list[int]:
        labels = list(labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"repeated labels in {labels}")
        return [self.index(lab) for lab in labels]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=complex)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class LabeledOperator:
    """Square complex matrix acting on the space described by ``layout``."""

    layout: Layout
    matrix: np.ndarray

    def __post_init__(self):
        layout = self.layout if isinstance(self.layout, Layout) else Layout(self.layout)
        object.__setattr__(self, "layout", layout)
        mat = _frozen(self.matrix)
        n = layout.total
        if mat.shape != (n, n):
            raise ValueError(f"matrix shape {mat.shape} does not match layout dimension {n}")
        object.__setattr__(self, "matrix", mat)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.layout.labels

    @property
    def dims(self) -> tuple[int, ...]:
        return self.layout.dims

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def dag(self) -> "LabeledOperator":
        return LabeledOperator(self.layout, self.matrix.conj().T)

    def with_matrix(self, matrix: np.ndarray) -> "LabeledOperator":
        return LabeledOperator(self.layout, matrix)

    def _check_same_layout(self, other: "LabeledOperator"):
        if self.layout != other.layout:
            raise ValueError(f"layout mismatch: {self.layout} vs {other.layout}")

    def __matmul__(self, other: "LabeledOperator") -> "LabeledOperator":
        self._check_same_layout(other)
        return LabeledOperator(self.layout, self.matrix @ other.matrix)

    def __add__(self, other: "LabeledOperator") -> "LabeledOperator":
        self._check_same_layout(other)
        return LabeledOperator(self.layout, self.matrix + other.matrix)

    def __sub__(self, other: "LabeledOperator") -> "LabeledOperator":
        self._check_same_layout(other)
        return LabeledOperator(self.layout, self.matrix - other.matrix)

    def __mul__(self, scalar) -> "LabeledOperator":
        return LabeledOperator(self.layout, self.matrix * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "LabeledOperator":
        return LabeledOperator(self.layout, self.matrix / scalar)

    def __neg__(self) -> "LabeledOperator":
        return LabeledOperator(self.layout, -self.matrix)

    def allclose(self, other: "LabeledOperator", atol: float = 1e-12) -> bool:
        return self.layout == other.layout and np.allclose(self.matrix, other.matrix, rtol=0, atol=atol)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def expectation(self, state: "PureState") -> complex:
        if state.layout != self.layout:
            raise ValueError(f"layout mismatch: {self.layout} vs {state.layout}")
        v = state.amplitudes
        return complex(np.vdot(v, self.matrix @ v))


@dataclass(frozen=True, eq=False)
class PureState:
    layout: Layout
    amplitudes: np.ndarray

    def __post_init__(self):
        layout = self.layout if isinstance(self.layout, Layout) else Layout(self.layout)
        object.__setattr__(self, "layout", layout)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape != (layout.total,):
            raise ValueError(f"{amps.size} amplitudes for layout of dimension {layout.total}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > 1e-12:
            raise ValueError(f"state is not normalized (squared norm {norm2!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, layout, amplitudes) -> "PureState":
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        return cls(layout, amps / np.linalg.norm(amps))

    def projector(self) -> LabeledOperator:
        v = self.amplitudes
        return LabeledOperator(self.layout, np.outer(v, v.conj()))


def _check_d(d: int):
    if int(d) != d or d < 2:
        raise ValueError(f"local dimension must be an integer >= 2, got {d!r}")


def identity(layout) -> LabeledOperator:
    layout = Layout(layout)
    return LabeledOperator(layout, np.eye(layout.total))


def flip_operator(d: int, labels: tuple[str, str] = ("A", "B")) -> LabeledOperator:
    """Swap operator F|ij> = |ji> on two d-level systems."""
    _check_d(d)
    n = d * d
    mat = np.zeros((n, n))
    for i in range(d):
        for j in range(d):
            mat[j * d + i, i * d + j] = 1.0
    return LabeledOperator(Layout([(labels[0], d), (labels[1], d)]), mat)


def max_entangled_vector(d: int) -> np.ndarray:
    _check_d(d)
    return np.eye(d).ravel() / np.sqrt(d)


def max_entangled_projector(d: int, labels: tuple[str, str] = ("A", "B")) -> LabeledOperator:
    """Projector onto (1/sqrt(d)) sum_i |ii>."""
    _check_d(d)
    diag = np.eye(d).ravel()
    return LabeledOperator(Layout([(labels[0], d), (labels[1], d)]), np.outer(diag, diag) / d)


def kron(*ops: LabeledOperator) -> LabeledOperator:
    """Tensor product; the layout is the concatenation of the factors' layouts."""
    if not ops:
        raise ValueError("kron needs at least one operator")
    layout = Layout([entry for op in ops for entry in op.layout])
    mat = ops[0].matrix
    for op in ops[1:]:
        mat = np.kron(mat, op.matrix)
    return LabeledOperator(layout, mat)


def _as_tensor(op: LabeledOperator) -> np.ndarray:
    dims = op.dims
    return op.matrix.reshape(dims + dims)


def permute_subsystems(op: LabeledOperator, new_order: Sequence[str]) -> LabeledOperator:
    """Reorder the tensor factors of ``op`` so its layout follows ``new_order``."""
    new_order = list(new_order)
    perm = op.layout.indices(new_order)
    if len(perm) != len(op.layout):
        raise ValueError(f"{new_order} is not a permutation of {op.labels}")
    n = len(perm)
    tensor = _as_tensor(op).transpose(perm + [p + n for p in perm])
    layout = Layout([op.layout[p] for p in perm])
    return LabeledOperator(layout, tensor.reshape(layout.total, layout.total))


def partial_transpose(op: LabeledOperator, subset: Iterable[str]) -> LabeledOperator:
    """Transpose the row/column indices of the named subsystems only."""
    idx = op.layout.indices(subset)
    n = len(op.layout)
    axes = list(range(2 * n))
    for i in idx:
        axes[i], axes[i + n] = axes[i + n], axes[i]
    tensor = _as_tensor(op).transpose(axes)
    return op.with_matrix(tensor.reshape(op.shape))


def partial_trace(op: LabeledOperator, subset: Iterable[str]) -> LabeledOperator:
    """Trace out the named subsystems. Tracing out everything is rejected."""
    idx = sorted(op.layout.indices(subset))
    if len(idx) == len(op.layout):
        raise ValueError("cannot trace out every subsystem; use LabeledOperator.trace()")
    tensor = _as_tensor(op)
    n = len(op.layout)
    # trace from the highest axis down so earlier axis numbers stay valid
    for k, i in enumerate(sorted(idx, reverse=True)):
        m = n - k
        tensor = np.trace(tensor, axis1=i, axis2=i + m)
    keep = Layout([entry for j, entry in enumerate(op.layout) if j not in idx])
    return LabeledOperator(keep, tensor.reshape(keep.total, keep.total))


def hermitian_spectrum(op: LabeledOperator | np.ndarray) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian operator."""
    mat = op.matrix if isinstance(op, LabeledOperator) else np.asarray(op)
    dev = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
    if dev > HERMITIAN_TOL:
        raise ValueError(f"operator is not Hermitian (max deviation {dev:.3e})")
    return np.linalg.eigvalsh((mat + mat.conj().T) / 2)


def is_psd(op: LabeledOperator, tol: float = PSD_TOL) -> bool:
    return bool(hermitian_spectrum(op)[0] >= -tol)


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random d x d unitary via QR of a Ginibre matrix with phase fix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def _haar_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def sample_states(kind: str, d: int, seed: int, labels: tuple[str, str] = ("A", "B")):
    """Seeded random samples.

    ``haar_pure_product`` and ``schmidt_rank2`` give a :class:`PureState` on
    ``d x d``; ``haar_unitary`` gives a :class:`LabeledOperator` on a single
    d-level system labelled ``labels[0]``.
    """
    _check_d(d)
    rng = np.random.default_rng(seed)
    layout = Layout([(labels[0], d), (labels[1], d)])
    if kind == "haar_pure_product":
        a = _haar_vector(d, rng)
        b = _haar_vector(d, rng)
        return PureState.normalized(layout, np.kron(a, b))
    if kind == "schmidt_rank2":
        ua = haar_unitary(d, rng)[:, :2]
        ub = haar_unitary(d, rng)[:, :2]
        coeff = np.abs(rng.standard_normal(2))
        coeff = coeff / np.linalg.norm(coeff)
        amps = coeff[0] * np.kron(ua[:, 0], ub[:, 0]) + coeff[1] * np.kron(ua[:, 1], ub[:, 1])
        return PureState.normalized(layout, amps)
    if kind == "haar_unitary":
        return LabeledOperator(Layout([(labels[0], d)]), haar_unitary(d, rng))
    raise ValueError(f"unknown sample kind {kind!r}")


def schmidt_coefficients(state: PureState, left: Sequence[str]) -> np.ndarray:
    """Descending Schmidt coefficients across the cut ``left | rest``."""
    left = list(left)
    rest = [lab for lab in state.layout.labels if lab not in left]
    order = state.layout.indices(left + rest)
    dims = state.layout.dims
    psi = state.amplitudes.reshape(dims).transpose(order)
    n_left = prod(dims[i] for i in order[: len(left)])
    return np.linalg.svd(psi.reshape(n_left, -1), compute_uv=False)


# -- JSON ------------------------------------------------------------------

def _layout_json(layout: Layout) -> dict:
    return {"labels": list(layout.labels), "dims": list(layout.dims)}


def operator_to_json(op: LabeledOperator) -> str:
    flat = op.matrix.ravel()
    return json.dumps({**_layout_json(op.layout), "re": flat.real.tolist(), "im": flat.imag.tolist()})


def _read_payload(payload: str | dict) -> tuple[Layout, np.ndarray]:
    data = json.loads(payload) if isinstance(payload, str) else payload
    if not isinstance(data, dict):
        raise ValueError(f"expected a JSON object, got {type(data).__name__}")
    try:
        labels, dims, re, im = data["labels"], data["dims"], data["re"], data["im"]
    except KeyError as exc:
        raise ValueError(f"missing field {exc.args[0]!r}") from None
    if len(labels) != len(dims):
        raise ValueError("labels and dims have different lengths")
    if len(re) != len(im):
        raise ValueError(f"re has {len(re)} entries but im has {len(im)}")
    layout = Layout(zip(labels, dims))
    return layout, np.asarray(re, dtype=float) + 1j * np.asarray(im, dtype=float)


def operator_from_json(payload: str | dict) -> LabeledOperator:
    layout, flat = _read_payload(payload)
    n = layout.total
    if flat.size != n * n:
        raise ValueError(f"expected {n * n} matrix entries for dimension {n}, got {flat.size}")
    return LabeledOperator(layout, flat.reshape(n, n))


def state_to_json(state: PureState) -> str:
    v = state.amplitudes
    return json.dumps({**_layout_json(state.layout), "re": v.real.tolist(), "im": v.imag.tolist()})


def state_from_json(payload: str | dict) -> PureState:
    layout, flat = _read_payload(payload)
    if flat.size != layout.total:
        raise ValueError(f"expected {layout.total} amplitudes, got {flat.size}")
    return PureState(layout, flat)
