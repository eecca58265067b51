"""Gate set: Fourier transform, generalized XOR, collective unitaries,
Haar sampling and the qutrit state-sharing branch operators."""

from __future__ import annotations

import numpy as np

from .core import ATOL, Operator


def _check_d(d: int) -> int:
    d = int(d)
    if d < 2:
        raise ValueError(f"dimension must be >= 2, got {d}")
    return d


def fourier(d: int) -> Operator:
    """F|j> = d^{-1/2} sum_k exp(+2 pi i jk/d) |k>."""
    d = _check_d(d)
    j, k = np.meshgrid(np.arange(d), np.arange(d))
    return Operator((d,), np.exp(2j * np.pi * j * k / d) / np.sqrt(d))


def gxor(d: int) -> Operator:
    """Two-qudit gate |i>|j> -> |i>|(i - j) mod d>; first factor is the control."""
    d = _check_d(d)
    mat = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            mat[i * d + (i - j) % d, i * d + j] = 1.0
    return Operator((d, d), mat)


def shift(d: int, step: int = 1) -> Operator:
    """Cyclic shift |j> -> |j + step mod d>."""
    d = _check_d(d)
    return Operator((d,), np.roll(np.eye(d), step, axis=0))


def collective(u: Operator, n: int) -> Operator:
    """n-fold tensor power ``u ⊗ u ⊗ ... ⊗ u``."""
    if len(u.dims) != 1:
        raise ValueError("collective expects a single-qudit operator")
    if n < 1:
        raise ValueError("particle count must be >= 1")
    if not u.is_unitary():
        raise ValueError("collective requires a unitary")
    mat = u.matrix
    for _ in range(n - 1):
        mat = np.kron(mat, u.matrix)
    return Operator(u.dims * n, mat)


def haar_random_unitary(d: int, rng: np.random.Generator) -> Operator:
    """Haar-distributed unitary via QR of a complex Ginibre matrix.

    The phases of diag(R) are divided out so the distribution is exactly
    Haar rather than biased by the QR sign convention.
    """
    d = _check_d(d)
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return Operator((d,), q * ph)


def _eps3(a: int, b: int, c: int) -> int:
    if len({a, b, c}) < 3:
        return 0
    return 1 if (a, b, c) in ((0, 1, 2), (1, 2, 0), (2, 0, 1)) else -1


def _check_branch(l: int, rho: int, k: int):
    for name, v in (("l", l), ("rho", rho), ("k", k)):
        if not 0 <= int(v) <= 2:
            raise IndexError(f"{name}={v} outside 0..2")


def branch_operator(l: int, rho: int, k: int) -> np.ndarray:
    """Qutrit map |m> -> w^{-lm} sum_{q,r} w^{kq} eps_{(m - rho) mod 3, q, r} |r>.

    ``w = exp(2 pi i/3)``; q and r run over the labels 0..2. Scaled by
    ``1/sqrt(54)`` this is exactly the conditional map taking the input
    qutrit to the receiver's particle for sender outcome (l, rho) and
    mediator outcome k. It has singular values (sqrt 3, sqrt 3, 0), so it
    is *not* unitary.
    """
    _check_branch(l, rho, k)
    w = np.exp(2j * np.pi / 3)
    mat = np.zeros((3, 3), dtype=complex)
    for m in range(3):
        for q in range(3):
            for r in range(3):
                e = _eps3((m - rho) % 3, q, r)
                if e:
                    mat[r, m] += w ** (-l * m) * w ** (k * q) * e
    return mat


def recovery_unitary(l: int, rho: int, k: int) -> Operator:
    """Unitary polar factor of :func:`branch_operator`.

    ``branch_operator = sqrt(3) * V @ P`` with V unitary and P the rank-2
    projector onto the branch's support; V is returned. Applying its
    adjoint restores the input exactly on that support; the component
    along the kernel is lost.
    """
    w_, s, vh = np.linalg.svd(branch_operator(l, rho, k))
    u = w_ @ vh
    assert np.max(np.abs(u.conj().T @ u - np.eye(3))) <= ATOL
    return Operator((3,), u)
