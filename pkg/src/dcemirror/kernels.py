"""Hot numeric kernels with numba and pure-numpy implementations.

Two inner loops dominate every run: the master-equation right-hand side
(applied ~1e5 times per scenario on D x D matrices) and the Wigner-trajectory
Euler-Maruyama sweep (~1e9-1e10 trajectory-steps per ensemble).  Both exist
in a numba @njit version and a pure-numpy version; the active backend is
chosen at import from the DCEMIRROR_BACKEND environment variable ("numba" or
"numpy", default numba when importable) and can be switched at runtime with
set_backend().  benchmarks/kernel_bench.py compares the two.

Trajectory noise is counter-based: a 64-bit mix of (seed, trajectory, step)
fed through Box-Muller.  No sequential RNG state exists anywhere, so results
are independent of chunking, thread count and evaluation order by
construction.
"""

from __future__ import annotations

import math
import os
import warnings

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range


def _initial_backend() -> str:
    req = os.environ.get("DCEMIRROR_BACKEND", "").strip().lower()
    if req in ("", "auto"):
        return "numba" if HAVE_NUMBA else "numpy"
    if req not in ("numba", "numpy"):
        raise ValueError(f"DCEMIRROR_BACKEND must be 'numba' or 'numpy', got {req!r}")
    if req == "numba" and not HAVE_NUMBA:
        warnings.warn("numba requested but not importable, using numpy backend")
        return "numpy"
    return req


_backend = _initial_backend()


def active_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ValueError("numba backend unavailable")
    _backend = name


# ---------------------------------------------------------------------------
# counter-based noise: splitmix64 finalizer + Box-Muller
# ---------------------------------------------------------------------------

_GOLDEN = 0x9E3779B97F4A7C15
_SEED_SALT = 0xD1B54A32D192ED03
_SALT_A = 0x8BB84B93962EACC9
_SALT_B = 0x2545F4914F6CDD1D
_MASK = 0xFFFFFFFFFFFFFFFF
_U32 = 2.0 ** -32
_TWO_PI = 2.0 * math.pi


def mix64_np(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, vectorized over uint64 arrays."""
    z = (np.atleast_1d(np.asarray(z, dtype=np.uint64)) + np.uint64(_GOLDEN)) & np.uint64(_MASK)
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(_MASK)
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(_MASK)
    return z ^ (z >> np.uint64(31))


def normals_from_bits(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two standard normals per 64-bit word (Box-Muller)."""
    u1 = ((z >> np.uint64(32)).astype(np.float64) + 1.0) * _U32  # (0, 1]
    u2 = (z & np.uint64(0xFFFFFFFF)).astype(np.float64) * _U32  # [0, 1)
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(_TWO_PI * u2), r * np.sin(_TWO_PI * u2)


def trajectory_keys(seed: int, n_traj: int) -> np.ndarray:
    base = mix64_np(np.uint64((seed ^ _SEED_SALT) & _MASK))
    idx = (np.arange(1, n_traj + 1, dtype=np.uint64) * np.uint64(_GOLDEN)) & np.uint64(
        _MASK
    )
    return mix64_np(base + idx)


def step_noise_np(keys: np.ndarray, step: int) -> np.ndarray:
    """Complex unit-variance-per-quadrature noise for one step, all trajectories."""
    z = mix64_np(keys + np.uint64(((step + 1) * _GOLDEN) & _MASK))
    n1, n2 = normals_from_bits(z)
    return n1 + 1j * n2


def initial_normals(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-trajectory (complex, complex) standard-normal pairs for sampling
    the initial Wigner spread of the cavity and mirror amplitudes."""
    za = mix64_np(keys ^ np.uint64(_SALT_A))
    zb = mix64_np(keys ^ np.uint64(_SALT_B))
    a1, a2 = normals_from_bits(za)
    b1, b2 = normals_from_bits(zb)
    return a1 + 1j * a2, b1 + 1j * b2


def wiener_increments(seed: int, count: int, gamma_a: float, dt: float) -> np.ndarray:
    """Stand-alone stream of Wiener increments dW = sqrt(gamma_a dt)/2 (n1+i n2),
    mainly for statistical tests of the noise."""
    keys = trajectory_keys(seed, count)
    scale = math.sqrt(gamma_a * dt) / 2.0
    return scale * step_noise_np(keys, 0)


if HAVE_NUMBA:

    @njit(numba.uint64(numba.uint64), cache=True, inline="always")
    def _mix64(z):
        z = z + numba.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> numba.uint64(30))) * numba.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> numba.uint64(27))) * numba.uint64(0x94D049BB133111EB)
        return z ^ (z >> numba.uint64(31))


# ---------------------------------------------------------------------------
# master-equation right-hand side
# ---------------------------------------------------------------------------


class LindbladWorkspace:
    """Precomputed weight arrays for the structured RHS on a (dc,dm,dc,dm)
    density array (cavity index first, as everywhere)."""

    def __init__(self, dim_cavity: int, dim_mirror: int, gamma_a: float):
        self.dc = dim_cavity
        self.dm = dim_mirror
        self.gamma_a = gamma_a
        n = np.arange(dim_cavity, dtype=np.float64)
        m = np.arange(dim_mirror, dtype=np.float64)
        self.g2 = np.sqrt((n + 1.0) * (n + 2.0))  # <n|a^2|n+2>
        self.sqm = np.sqrt(m)  # <m|b|m+1> shifted: sqm[m] = sqrt(m)
        self.sq1 = np.sqrt(n + 1.0)  # <n|a|n+1>
        # broadcast helpers for the numpy path
        dc, dm = dim_cavity, dim_mirror
        self._wn = (self.g2[: dc - 2, None, None, None] * self.sqm[None, 1:, None, None])
        self._wp = (self.g2[None, None, : dc - 2, None] * self.sqm[None, None, None, 1:])
        self._jump = self.sq1[: dc - 1, None, None, None] * self.sq1[None, None, : dc - 1, None]
        self._nsum = n[:, None, None, None] + n[None, None, :, None]

    def out_buffer(self) -> np.ndarray:
        return np.empty((self.dc, self.dm, self.dc, self.dm), dtype=np.complex128)


def _rhs_numpy(sig, out, z, ws: LindbladWorkspace):
    dc, dm = ws.dc, ws.dm
    g = ws.gamma_a
    zc = z.conjugate()
    np.multiply(sig, -0.5 * g * ws._nsum, out=out)
    # -i ( H sigma - sigma H ) with H = z a^2 b'dag + conj(z) a'dag^2 b
    out[: dc - 2, 1:, :, :] += (-1j * z) * ws._wn * sig[2:, : dm - 1, :, :]
    out[2:, : dm - 1, :, :] += (-1j * zc) * ws._wn * sig[: dc - 2, 1:, :, :]
    out[:, :, 2:, : dm - 1] += (1j * z) * ws._wp * sig[:, :, : dc - 2, 1:]
    out[:, :, : dc - 2, 1:] += (1j * zc) * ws._wp * sig[:, :, 2:, : dm - 1]
    # gamma a sigma a'dag
    out[: dc - 1, :, : dc - 1, :] += g * ws._jump * sig[1:, :, 1:, :]
    return out


if HAVE_NUMBA:

    @njit(cache=True, parallel=True, nogil=True)
    def _rhs_numba(sig, out, z, gamma, g2, sqm, sq1):
        dc, dm = sig.shape[0], sig.shape[1]
        zc = z.conjugate()
        miz = -1j * z
        mizc = -1j * zc
        piz = 1j * z
        pizc = 1j * zc
        for n in prange(dc):
            for m in range(dm):
                for p in range(dc):
                    for q in range(dm):
                        acc = -0.5 * gamma * (n + p) * sig[n, m, p, q]
                        if n + 2 < dc and m >= 1:
                            acc += miz * g2[n] * sqm[m] * sig[n + 2, m - 1, p, q]
                        if n >= 2 and m + 1 < dm:
                            acc += mizc * g2[n - 2] * sqm[m + 1] * sig[n - 2, m + 1, p, q]
                        if p >= 2 and q + 1 < dm:
                            acc += piz * g2[p - 2] * sqm[q + 1] * sig[n, m, p - 2, q + 1]
                        if p + 2 < dc and q >= 1:
                            acc += pizc * g2[p] * sqm[q] * sig[n, m, p + 2, q - 1]
                        if n + 1 < dc and p + 1 < dc:
                            acc += gamma * sq1[n] * sq1[p] * sig[n + 1, m, p + 1, q]
                        out[n, m, p, q] = acc
        return out


if HAVE_NUMBA:

    @njit(cache=True, parallel=True, nogil=True)
    def _rhs_numba_herm(sig, out, z, gamma, g2, sqm, sq1):
        # computes the same map as _rhs_numba but only for the upper
        # triangle in the flattened (cavity, mirror) row index, mirroring
        # the conjugate; valid only for Hermitian sig
        dc, dm = sig.shape[0], sig.shape[1]
        d = dc * dm
        zc = z.conjugate()
        miz = -1j * z
        mizc = -1j * zc
        piz = 1j * z
        pizc = 1j * zc
        for row in prange(d):
            n = row // dm
            m = row - n * dm
            for col in range(row, d):
                p = col // dm
                q = col - p * dm
                acc = -0.5 * gamma * (n + p) * sig[n, m, p, q]
                if n + 2 < dc and m >= 1:
                    acc += miz * g2[n] * sqm[m] * sig[n + 2, m - 1, p, q]
                if n >= 2 and m + 1 < dm:
                    acc += mizc * g2[n - 2] * sqm[m + 1] * sig[n - 2, m + 1, p, q]
                if p >= 2 and q + 1 < dm:
                    acc += piz * g2[p - 2] * sqm[q + 1] * sig[n, m, p - 2, q + 1]
                if p + 2 < dc and q >= 1:
                    acc += pizc * g2[p] * sqm[q] * sig[n, m, p + 2, q - 1]
                if n + 1 < dc and p + 1 < dc:
                    acc += gamma * sq1[n] * sq1[p] * sig[n + 1, m, p + 1, q]
                if col == row:
                    # the exact derivative has a real diagonal; storing the
                    # rounding dust in Im(acc) would leak a non-hermitian
                    # component that feeds back on itself unstably
                    out[n, m, p, q] = complex(acc.real, 0.0)
                else:
                    out[n, m, p, q] = acc
                    out[p, q, n, m] = acc.conjugate()
        return out


def lindblad_rhs_apply(
    sig: np.ndarray,
    out: np.ndarray,
    z: complex,
    ws: LindbladWorkspace,
    hermitian: bool = False,
):
    """out <- -i[H(z), sig] + dissipator(sig) on the 4-d density array, where
    H(z) = z a^2 b'dag + h.c. and the dissipator is the zero-temperature
    cavity-loss Lindblad term at rate gamma_a.  hermitian=True computes only
    the upper triangle and mirrors it (valid for Hermitian sig, ~1.5x faster)."""
    if _backend == "numba":
        if hermitian:
            return _rhs_numba_herm(sig, out, complex(z), ws.gamma_a, ws.g2, ws.sqm, ws.sq1)
        return _rhs_numba(sig, out, complex(z), ws.gamma_a, ws.g2, ws.sqm, ws.sq1)
    return _rhs_numpy(sig, out, complex(z), ws)


# ---------------------------------------------------------------------------
# fused Runge-Kutta stage arithmetic (the combination passes rival the RHS in
# memory traffic at master-equation sizes, so they get kernels too)
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, parallel=True, nogil=True)
    def _combine_numba(out, y, kflat, coeffs, h, n_terms):
        n = out.shape[0]
        for i in prange(n):
            acc = 0.0 + 0.0j
            for j in range(n_terms):
                acc += coeffs[j] * kflat[j, i]
            out[i] = y[i] + h * acc

    @njit(cache=True, parallel=True, nogil=True)
    def _err_norm_numba(kflat, y0, y1, coeffs, h, atol, rtol, n_terms, partials):
        # per-block partial sums keep the reduction order independent of the
        # thread count (the controller's step sequence must be reproducible)
        n = y0.shape[0]
        nblk = partials.shape[0]
        blk = (n + nblk - 1) // nblk
        for b in prange(nblk):
            lo = b * blk
            hi = min(n, lo + blk)
            total = 0.0
            for i in range(lo, hi):
                acc = 0.0 + 0.0j
                for j in range(n_terms):
                    acc += coeffs[j] * kflat[j, i]
                e = h * acc
                a0 = abs(y0[i])
                a1 = abs(y1[i])
                big = a0 if a0 > a1 else a1
                sc = atol + rtol * big
                r = abs(e) / sc
                total += r * r
            partials[b] = total

    @njit(cache=True, parallel=True, nogil=True)
    def _finish_step_numba(out, y, kflat, b5, ecf, h, atol, rtol, partials):
        # fused: out = y + h sum b5_j K_j, and the scaled error norm of
        # h sum ecf_j K_j in the same pass
        n = y.shape[0]
        nblk = partials.shape[0]
        blk = (n + nblk - 1) // nblk
        for b in prange(nblk):
            lo = b * blk
            hi = min(n, lo + blk)
            total = 0.0
            for i in range(lo, hi):
                acc5 = 0.0 + 0.0j
                acce = 0.0 + 0.0j
                for j in range(7):
                    kj = kflat[j, i]
                    acc5 += b5[j] * kj
                    acce += ecf[j] * kj
                yi = y[i]
                y1 = yi + h * acc5
                out[i] = y1
                e = h * acce
                a0 = abs(yi)
                a1 = abs(y1)
                big = a0 if a0 > a1 else a1
                sc = atol + rtol * big
                r = abs(e) / sc
                total += r * r
            partials[b] = total


def stage_combine(out_flat, y_flat, k_flat, coeffs, h, n_terms):
    """out = y + h * sum_j coeffs[j] * K[j] over flat complex views."""
    if _backend == "numba":
        _combine_numba(out_flat, y_flat, k_flat, coeffs, h, n_terms)
        return
    acc = coeffs[0] * k_flat[0]
    for j in range(1, n_terms):
        acc += coeffs[j] * k_flat[j]
    np.multiply(acc, h, out=acc)
    np.add(y_flat, acc, out=out_flat)


_N_PARTIALS = 64


def error_norm(k_flat, y0_flat, y1_flat, coeffs, h, atol, rtol, n_terms) -> float:
    """Scaled RMS norm of h * sum_j coeffs[j] K[j] against atol/rtol."""
    if _backend == "numba":
        partials = np.empty(_N_PARTIALS, dtype=np.float64)
        _err_norm_numba(k_flat, y0_flat, y1_flat, coeffs, h, atol, rtol, n_terms, partials)
        return float(math.sqrt(partials.sum() / y0_flat.shape[0]))
    acc = coeffs[0] * k_flat[0]
    for j in range(1, n_terms):
        acc += coeffs[j] * k_flat[j]
    err = h * acc
    scale = atol + rtol * np.maximum(np.abs(y0_flat), np.abs(y1_flat))
    return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def finish_step(out_flat, y_flat, k_flat, b5, ecf, h, atol, rtol) -> float:
    """Propagate the 5th-order solution and return the embedded error norm
    in a single pass over the stage derivatives."""
    if _backend == "numba":
        partials = np.empty(_N_PARTIALS, dtype=np.float64)
        _finish_step_numba(out_flat, y_flat, k_flat, b5, ecf, h, atol, rtol, partials)
        return float(math.sqrt(partials.sum() / y_flat.shape[0]))
    stage_combine(out_flat, y_flat, k_flat, b5, h, 7)
    return error_norm(k_flat, y_flat, out_flat, ecf, h, atol, rtol, 7)


# ---------------------------------------------------------------------------
# Wigner-trajectory ensemble sweep
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True, parallel=True, nogil=True)
    def _twa_numba(
        a0, b0, keys, n_steps, dt, gamma_a, omega_c, dph, nscale, rec_steps, out_a, out_b, div_step
    ):
        n_traj = a0.shape[0]
        n_rec = rec_steps.shape[0]
        hg = 0.5 * gamma_a
        two_wc = 2.0 * omega_c
        golden = numba.uint64(0x9E3779B97F4A7C15)
        u32 = 2.0 ** -32
        two_pi = 6.283185307179586
        for j in prange(n_traj):
            a = a0[j]
            b = b0[j]
            key = keys[j]
            ph = 1.0 + 0.0j  # e^{-i delta t}, advanced multiplicatively
            died = np.int64(-1)
            r = 0
            for s in range(n_steps + 1):
                if r < n_rec and rec_steps[r] == s:
                    out_a[j, r] = a
                    out_b[j, r] = b
                    r += 1
                if s == n_steps or died >= 0:
                    continue
                z = _mix64(key + numba.uint64(s + 1) * golden)
                u1 = ((z >> numba.uint64(32)) + numba.uint64(1)) * u32
                u2 = (z & numba.uint64(0xFFFFFFFF)) * u32
                rad = math.sqrt(-2.0 * math.log(u1))
                dw = nscale * complex(rad * math.cos(two_pi * u2), rad * math.sin(two_pi * u2))
                da = (-hg * a - 1j * two_wc * ph * b * a.conjugate()) * dt + dw
                db = (-1j * omega_c * ph.conjugate()) * (a * a) * dt
                a = a + da
                b = b + db
                ph = ph * dph
                if not (
                    math.isfinite(a.real)
                    and math.isfinite(a.imag)
                    and math.isfinite(b.real)
                    and math.isfinite(b.imag)
                ):
                    died = s
            div_step[j] = died


def _twa_numpy(
    a0, b0, keys, n_steps, dt, gamma_a, omega_c, dph, nscale, rec_steps, out_a, out_b, div_step
):
    a = a0.copy()
    b = b0.copy()
    alive = np.ones(a.shape[0], dtype=bool)
    div_step.fill(-1)
    hg = 0.5 * gamma_a
    two_wc = 2.0 * omega_c
    ph = 1.0 + 0.0j
    n_rec = rec_steps.shape[0]
    r = 0
    for s in range(n_steps + 1):
        if r < n_rec and rec_steps[r] == s:
            out_a[:, r] = a
            out_b[:, r] = b
            r += 1
        if s == n_steps:
            break
        dw = nscale * step_noise_np(keys, s)
        da = (-hg * a - 1j * two_wc * ph * b * np.conj(a)) * dt + dw
        db = (-1j * omega_c * np.conj(ph)) * (a * a) * dt
        a = np.where(alive, a + da, a)
        b = np.where(alive, b + db, b)
        ph = ph * dph
        bad = alive & ~(
            np.isfinite(a.real) & np.isfinite(a.imag) & np.isfinite(b.real) & np.isfinite(b.imag)
        )
        if bad.any():
            div_step[bad] = s
            alive &= ~bad


def twa_sweep(
    a0: np.ndarray,
    b0: np.ndarray,
    keys: np.ndarray,
    n_steps: int,
    dt: float,
    gamma_a: float,
    omega_c: float,
    dph: complex,
    nscale: float,
    rec_steps: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Integrate the full ensemble, recording (A, B) at the given step
    indices (which must include any index in [0, n_steps]).  dph is the
    per-step carrier increment e^{-i delta dt} of the co-rotating frame;
    nscale = sqrt(gamma_a dt)/2 scales the noise (0 disables it).
    Returns (out_a, out_b, div_step) with shapes (n_traj, n_rec) and (n_traj,);
    div_step is -1 for trajectories that stayed finite."""
    n_traj = a0.shape[0]
    n_rec = rec_steps.shape[0]
    out_a = np.empty((n_traj, n_rec), dtype=np.complex128)
    out_b = np.empty((n_traj, n_rec), dtype=np.complex128)
    div_step = np.empty(n_traj, dtype=np.int64)
    args = (
        np.ascontiguousarray(a0),
        np.ascontiguousarray(b0),
        np.ascontiguousarray(keys),
        int(n_steps),
        float(dt),
        float(gamma_a),
        float(omega_c),
        complex(dph),
        float(nscale),
        np.ascontiguousarray(rec_steps),
        out_a,
        out_b,
        div_step,
    )
    if _backend == "numba":
        _twa_numba(*args)
    else:
        _twa_numpy(*args)
    return out_a, out_b, div_step
