"""Continuous-variable example states and their witness expectations.

States live in a truncated Fock basis (pure amplitude vectors) or as
photon-number diagonals.  Fidelities with displaced Fock states go through
the closed-form displacement matrix elements, so no operator exponentials
are needed; the radial Wigner profile of a diagonal state is a Laguerre
series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import binomial, gauss_laguerre, laguerre_fn, laguerre_poly
from .witness import FockDiagonal, WitnessSpec

NORM_TOL = 1e-9


@dataclass(frozen=True)
class PureStateFock:
    """Pure state as Fock amplitudes up to a cutoff."""

    amplitudes: tuple

    def __post_init__(self):
        amp = tuple(complex(a) for a in self.amplitudes)
        norm = sum(abs(a) ** 2 for a in amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"amplitudes not normalised at cutoff (norm {norm})")
        object.__setattr__(self, "amplitudes", amp)

    @property
    def cutoff(self) -> int:
        return len(self.amplitudes) - 1

    def diagonal(self) -> "MixedDiagonal":
        probs = [abs(a) ** 2 for a in self.amplitudes]
        total = sum(probs)
        return MixedDiagonal(FockDiagonal(tuple(p / total for p in probs)))


@dataclass(frozen=True)
class MixedDiagonal:
    """Mixed state diagonal in the Fock basis."""

    F: FockDiagonal

    @property
    def cutoff(self) -> int:
        return len(self.F.F) - 1


def default_cutoff(n_max: int, alpha: complex = 0j) -> int:
    """Cutoff heuristic: coherent tails die superexponentially past |alpha|^2."""
    return max(20, 4 * (n_max + math.ceil(abs(alpha) ** 2)) + 10)


def displacement_element(k: int, l: int, alpha: complex) -> complex:
    """<k|D(alpha)|l> from the closed Laguerre-type sum."""
    if k < 0 or l < 0:
        raise ValueError("Fock indices must be natural numbers")
    a = complex(alpha)
    if a == 0:
        return 1.0 + 0j if k == l else 0j
    total = 0j
    for p in range(min(k, l) + 1):
        total += (
            math.sqrt(math.factorial(k) * math.factorial(l))
            * (-1) ** (l - p)
            / (
                math.factorial(p)
                * math.factorial(k - p)
                * math.factorial(l - p)
            )
            * a ** (k - p)
            * np.conjugate(a) ** (l - p)
        )
    return math.exp(-0.5 * abs(a) ** 2) * total


def displacement_matrix(alpha: complex, size: int) -> np.ndarray:
    return np.array(
        [[displacement_element(k, l, alpha) for l in range(size)] for k in range(size)]
    )


def displace(state: PureStateFock, alpha: complex, pad: int = 0) -> PureStateFock:
    """Apply D(alpha); pad the cutoff so the result stays normalised."""
    size = state.cutoff + 1 + pad
    amp = np.zeros(size, dtype=complex)
    amp[: state.cutoff + 1] = state.amplitudes
    out = displacement_matrix(alpha, size) @ amp
    return PureStateFock(tuple(out / math.sqrt(float(np.vdot(out, out).real))))


# ---------------------------------------------------------------------------
# named example states
# ---------------------------------------------------------------------------


def coherent(alpha: complex, cutoff: int | None = None) -> PureStateFock:
    a = complex(alpha)
    N = cutoff if cutoff is not None else default_cutoff(0, a)
    amp = np.array(
        [a**n / math.sqrt(math.factorial(n)) for n in range(N + 1)], dtype=complex
    )
    amp *= math.exp(-0.5 * abs(a) ** 2)
    amp /= math.sqrt(float(np.vdot(amp, amp).real))
    return PureStateFock(tuple(amp))


def fock(n: int) -> PureStateFock:
    if n < 0:
        raise ValueError("Fock index must be a natural number")
    amp = [0j] * (n + 1)
    amp[n] = 1.0 + 0j
    return PureStateFock(tuple(amp))


def pssvs(r: float, cutoff: int | None = None) -> PureStateFock:
    """Photon-subtracted squeezed vacuum, a |1>-like state for small r."""
    if r == 0:
        raise ValueError("squeezing parameter must be nonzero")
    N = cutoff if cutoff is not None else max(40, default_cutoff(1) + int(20 * abs(r)))
    amp = np.zeros(N + 1, dtype=complex)
    th = math.tanh(r)
    # squeezed vacuum has even components c_{2k}; subtracting one photon
    # shifts them onto the odd ladder with weight sqrt(2k)
    for k in range(1, (N + 1) // 2 + 1):
        if 2 * k - 1 > N:
            break
        c2k = (
            math.sqrt(math.factorial(2 * k))
            / (2**k * math.factorial(k))
            * (-th) ** k
        )
        amp[2 * k - 1] = math.sqrt(2 * k) * c2k
    amp /= math.sqrt(math.cosh(r)) * math.sinh(r)
    norm = float(np.vdot(amp, amp).real)
    if abs(norm - 1.0) > 1e-6:
        raise ValueError("cutoff too small for this squeezing parameter")
    amp /= math.sqrt(norm)
    return PureStateFock(tuple(amp))


def cat2(alpha: complex, cutoff: int | None = None) -> PureStateFock:
    """Even superposition of two opposite coherent states."""
    a = complex(alpha)
    N = cutoff if cutoff is not None else default_cutoff(2, a)
    amp = np.zeros(N + 1, dtype=complex)
    for n in range(0, N + 1, 2):
        amp[n] = 2.0 * a**n / math.sqrt(math.factorial(n))
    amp *= math.exp(-0.5 * abs(a) ** 2)
    amp /= math.sqrt(float(np.vdot(amp, amp).real))
    return PureStateFock(tuple(amp))


def cat4(alpha: complex, cutoff: int | None = None) -> PureStateFock:
    """Equal superposition of four coherent states on the axes."""
    a = complex(alpha)
    N = cutoff if cutoff is not None else default_cutoff(4, a)
    amp = np.zeros(N + 1, dtype=complex)
    for n in range(0, N + 1, 4):
        amp[n] = 4.0 * a**n / math.sqrt(math.factorial(n))
    amp *= math.exp(-0.5 * abs(a) ** 2)
    amp /= math.sqrt(float(np.vdot(amp, amp).real))
    return PureStateFock(tuple(amp))


def lossy_fock(n: int, eta: float) -> MixedDiagonal:
    """Fock state |n> through loss eta; eta = 0 returns |n> itself."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError("loss parameter must lie in [0, 1]")
    F = tuple(
        binomial(n, k) * eta ** (n - k) * (1.0 - eta) ** k for k in range(n + 1)
    )
    return MixedDiagonal(FockDiagonal(F))


_STATE_BUILDERS = {
    "pssvs": (pssvs, {"r": float}),
    "cat2": (cat2, {"alpha": complex}),
    "cat4": (cat4, {"alpha": complex}),
    "coherent": (coherent, {"alpha": complex}),
    "fock": (fock, {"n": int}),
    "lossy_fock": (lossy_fock, {"n": int, "eta": float}),
}


def parse_state(text: str):
    """Parse specs like 'cat2:alpha=1.4+0j' or 'lossy_fock:n=3,eta=0.2'."""
    name, _, rest = text.partition(":")
    name = name.strip()
    if name not in _STATE_BUILDERS:
        raise ValueError(f"unknown state {name!r}")
    fn, sig = _STATE_BUILDERS[name]
    kwargs = {}
    if rest.strip():
        for item in rest.split(","):
            key, _, val = item.partition("=")
            key = key.strip()
            if key not in sig:
                raise ValueError(f"unknown parameter {key!r} for state {name}")
            conv = sig[key]
            if conv is complex:
                kwargs[key] = complex(val.strip().replace("i", "j"))
            else:
                kwargs[key] = conv(val.strip())
    missing = set(sig) - set(kwargs)
    if missing:
        raise ValueError(f"missing parameters for {name}: {sorted(missing)}")
    return fn(**kwargs)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------


def wigner_radial(state: MixedDiagonal, r: float) -> float:
    """Wigner value of a number-diagonal state at radius r."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    x = 4.0 * r * r
    return (2.0 / math.pi) * sum(
        float(f) * laguerre_fn(k, x) for k, f in enumerate(state.F.F)
    )


def wigner_radial_norm(state: MixedDiagonal, nodes: int = 200) -> float:
    """2*pi * int_0^inf W(r) r dr, which is 1 for a unit-trace state.

    Computed by Gauss-Laguerre in the u = 4r^2 variable.
    """
    u, w = gauss_laguerre(nodes)
    total = 0.0
    for k, f in enumerate(state.F.F):
        sign = -1.0 if k % 2 else 1.0
        # int L_k(u) e^{-u/2} du with rule weight e^{-u}
        total += float(f) * sign * float(np.sum(w * laguerre_poly(k, u) * np.exp(u / 2.0)))
    return 0.5 * total


def fidelity_with_fock(state, k: int, alpha: complex = 0j) -> float:
    """F(D(alpha)^dag rho D(alpha), |k>)."""
    if isinstance(state, PureStateFock):
        size = state.cutoff + 1
        if alpha == 0:
            amps = state.amplitudes
            return abs(amps[k]) ** 2 if k < size else 0.0
        row = np.array(
            [displacement_element(k, l, -alpha) for l in range(size)]
        )
        return abs(np.dot(row, np.array(state.amplitudes))) ** 2
    if isinstance(state, MixedDiagonal):
        F = state.F.F
        if alpha == 0:
            return float(F[k]) if k < len(F) else 0.0
        return sum(
            float(f) * abs(displacement_element(k, j, -alpha)) ** 2
            for j, f in enumerate(F)
        )
    raise TypeError("state must be PureStateFock or MixedDiagonal")


def witness_expectation(state, spec: WitnessSpec) -> float:
    """Expectation of the witness: sum_k a_k F(D^dag rho D, |k>).

    The state's cutoff must carry essentially all of its norm after the
    displacement; the constructors guarantee that via the cutoff heuristic.
    """
    _check_cutoff(state, spec)
    return sum(
        a * fidelity_with_fock(state, k, spec.alpha)
        for k, a in enumerate(spec.a, start=1)
        if a
    )


def _check_cutoff(state, spec: WitnessSpec) -> None:
    if isinstance(state, PureStateFock):
        norm = sum(abs(a) ** 2 for a in state.amplitudes)
    else:
        norm = sum(float(f) for f in state.F.F)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValueError("state norm lost to truncation; raise the cutoff")


def violation_and_distance(expectation: float, upper_threshold: float):
    """Positive violation margin, which lower-bounds the trace distance
    to the Wigner-positive set; None when the witness does not trigger."""
    delta = expectation - upper_threshold
    return delta if delta > 0 else None


# closed-form fidelity curves used by the plot-data command


def pssvs_fidelity(r: float) -> float:
    return 1.0 / math.cosh(r) ** 3


def cat2_fidelity(alpha_sq: float) -> float:
    return alpha_sq**2 / (2.0 * math.cosh(alpha_sq))


def cat4_fidelity(alpha_sq: float) -> float:
    return (alpha_sq**4 / 12.0) / (math.cosh(alpha_sq) + math.cos(alpha_sq))
