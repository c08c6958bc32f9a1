"""Truncated Laguerre-Gauss expansion and the per-section lens operators.

A field is represented by coefficients on the profile basis at a stated
plane z inside a section: the profile of mode (n, m) is the analytic
field with the plane-wave factor e^{-ikz} and the Gouy factor
e^{+i(|m|+2n+1) psi(z)} divided out. Profiles at a fixed z are
orthonormal, so free propagation is a pure per-mode phase on the
coefficients and all physics of a lens pass lives in one 2-D quadrature
at the lens plane.

Coordinates are section-local: the waist sits at z = 0 and lenses at
z = +-L0/2. A section step is propagate_section (plane -L0/2 to the
lens at L0/2 + delta_L) followed by apply_lens (back to -L0/2 of the
next section).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import QuadratureError
from ..optics import EquivalentResonator, ModeIndex, mode_field, mode_profile
from .quadrature import DiskQuadrature, default_grid

MAX_TRUNCATION = 12

# A lens offset beyond this many waists leaves the truncated basis.
MAX_OFFSET_WAISTS = 10.0


def mode_indices(truncation_n: int) -> list[ModeIndex]:
    """Canonical ordering of all modes with 2n + |m| <= truncation_n."""
    if truncation_n < 0:
        raise ValueError("truncation must be >= 0")
    out = []
    for q in range(truncation_n + 1):
        for m in range(-q, q + 1):
            if (q - abs(m)) % 2 == 0:
                out.append(ModeIndex((q - abs(m)) // 2, m))
    return out


@dataclass(frozen=True)
class ModeExpansion:
    """Coefficients on the profile basis at ``plane_z_m``.

    ``coefficients`` is ordered as :func:`mode_indices`. Total power
    sum |c|^2 stays <= 1 + 1e-9 for any field entering with unit power.
    """

    coefficients: np.ndarray
    truncation_n: int
    wavelength_m: float
    resonator: EquivalentResonator
    plane_z_m: float

    def __post_init__(self) -> None:
        c = np.asarray(self.coefficients)
        if c.ndim != 1 or c.size != len(mode_indices(self.truncation_n)):
            raise ValueError("coefficient count does not match the truncation")
        if not np.all(np.isfinite(c.view(float))):
            raise ValueError("coefficients must be finite")

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2))

    def coefficient(self, radial_n: int, azimuthal_m: int) -> complex:
        idx = mode_indices(self.truncation_n).index(ModeIndex(radial_n, azimuthal_m))
        return complex(self.coefficients[idx])


@dataclass(frozen=True)
class LensTransferResult:
    """apply_lens output: new expansion plus where the lost power went."""

    expansion: ModeExpansion
    aperture_loss: float
    truncation_loss: float


def fundamental_expansion(
    resonator: EquivalentResonator, truncation_n: int = 8
) -> ModeExpansion:
    """Unit-power fundamental at the section entry plane z = -L0/2."""
    coeff = np.zeros(len(mode_indices(truncation_n)), dtype=complex)
    coeff[0] = 1.0
    return ModeExpansion(
        coefficients=coeff,
        truncation_n=truncation_n,
        wavelength_m=resonator.wavelength_m,
        resonator=resonator,
        plane_z_m=-resonator.f0_m,
    )


def sample_mode(
    resonator: EquivalentResonator,
    mode: ModeIndex,
    grid: DiskQuadrature,
    plane_z_m: float,
    offset_m: float = 0.0,
) -> np.ndarray:
    """Analytic mode field on the grid, optionally centered at x = offset."""
    r = grid.r[:, None]
    phi = grid.phi[None, :]
    if offset_m == 0.0:
        return np.asarray(mode_field(resonator, mode, r, phi, plane_z_m))
    x = r * np.cos(phi) - offset_m
    y = r * np.sin(phi)
    return np.asarray(
        mode_field(resonator, mode, np.hypot(x, y), np.arctan2(y, x), plane_z_m)
    )


def profile_basis(
    resonator: EquivalentResonator,
    modes: list[ModeIndex],
    grid: DiskQuadrature,
    plane_z_m: float,
    center_offset_m: float = 0.0,
) -> np.ndarray:
    """Stack of phase-stripped profiles [len(modes), n_radial, n_phi]."""
    r = grid.r[:, None]
    phi = grid.phi[None, :]
    if center_offset_m != 0.0:
        x = r * np.cos(phi) - center_offset_m
        y = r * np.sin(phi)
        r, phi = np.hypot(x, y), np.arctan2(y, x)
    out = np.empty((len(modes), grid.n_radial, grid.n_phi), dtype=complex)
    for a, mode in enumerate(modes):
        out[a] = mode_profile(resonator, mode, r, phi, plane_z_m)
    return out


def decompose(
    field_on_grid: np.ndarray,
    resonator: EquivalentResonator,
    truncation_n: int,
    *,
    grid: DiskQuadrature | None = None,
    plane_z_m: float = 0.0,
) -> ModeExpansion:
    """Project a sampled field onto the truncated profile basis.

    Coefficients are the overlap integrals <profile | field> by disk
    quadrature; power missing from sum |c|^2 is the truncation leak and
    stays with the caller (input power is grid.integrate(|field|^2)).

    Raises
    ------
    QuadratureError
        When the grid extent is under 5 beam radii at this plane.
    """
    if truncation_n > MAX_TRUNCATION:
        raise ValueError(f"truncation_n must be <= {MAX_TRUNCATION}")
    if grid is None:
        grid = default_grid(resonator, truncation_n)
    grid.require_extent(float(resonator.beam_radius(plane_z_m)))
    field = np.asarray(field_on_grid, dtype=complex)
    if field.shape != (grid.n_radial, grid.n_phi):
        raise ValueError(
            f"field shape {field.shape} does not match grid "
            f"({grid.n_radial}, {grid.n_phi})"
        )
    modes = mode_indices(truncation_n)
    basis = profile_basis(resonator, modes, grid, plane_z_m)
    coeff = grid.integrate(np.conj(basis) * field[None, :, :])
    return ModeExpansion(
        coefficients=np.asarray(coeff, dtype=complex),
        truncation_n=truncation_n,
        wavelength_m=resonator.wavelength_m,
        resonator=resonator,
        plane_z_m=plane_z_m,
    )


def propagate_section(expansion: ModeExpansion, length_m: float) -> ModeExpansion:
    """Advance the expansion plane by ``length_m`` of free propagation.

    Each coefficient picks up exp(-ik dz) exp(+i (|m|+2n+1) dpsi); the
    norm is conserved exactly and zero length is the identity.
    """
    res = expansion.resonator
    z1 = expansion.plane_z_m
    z2 = z1 + length_m
    k = res.wavenumber
    dpsi = float(res.gouy(z2) - res.gouy(z1))
    orders = np.array([m.order + 1 for m in mode_indices(expansion.truncation_n)])
    # keep the huge common k dz phase separate from the per-mode Gouy
    # phase so mode-relative phases stay clean at machine precision
    phase = complex(np.exp(-1j * k * (z2 - z1))) * np.exp(1j * orders * dpsi)
    return ModeExpansion(
        coefficients=expansion.coefficients * phase,
        truncation_n=expansion.truncation_n,
        wavelength_m=expansion.wavelength_m,
        resonator=res,
        plane_z_m=z2,
    )


def apply_lens(
    expansion: ModeExpansion,
    focal_length_m: float,
    offset_m: float = 0.0,
    *,
    aperture_radius_m: float | None = None,
    recenter: bool = False,
    grid: DiskQuadrature | None = None,
) -> LensTransferResult:
    """Pass the field through a thin lens and re-expand for the next section.

    The full lens phase exp(+ik r'^2 / (2 f)) is applied about the
    displaced lens axis (r' measured from x = offset), optionally with a
    hard aperture of the given radius. With ``recenter`` the output basis
    is centered on the displaced lens axis (chained bookkeeping): the
    incoming field is shifted by +offset and the screen is centered.
    The output expansion lives at plane -L0/2 of the next section.

    Raises
    ------
    QuadratureError
        Propagated from the undersampled-grid check.
    ValueError
        If |offset| exceeds 10 waists (outside the truncated basis).
    """
    res = expansion.resonator
    if abs(offset_m) > MAX_OFFSET_WAISTS * res.waist_w0_m:
        raise ValueError(
            f"lens offset {offset_m:.3g} m exceeds {MAX_OFFSET_WAISTS} waists"
        )
    if focal_length_m <= 0:
        raise ValueError("focal length must be positive")
    if grid is None:
        grid = default_grid(res, expansion.truncation_n)
    z_in = expansion.plane_z_m
    z_out = -res.f0_m
    grid.require_extent(float(res.beam_radius(z_in)))
    grid.require_extent(float(res.beam_radius(z_out)))
    modes = mode_indices(expansion.truncation_n)

    synth_center = -offset_m if recenter else 0.0
    screen_center = 0.0 if recenter else offset_m
    basis_in = profile_basis(res, modes, grid, z_in, center_offset_m=synth_center)
    field = np.tensordot(expansion.coefficients, basis_in, axes=(0, 0))

    k = res.wavenumber
    r = grid.r[:, None]
    x = r * np.cos(grid.phi)[None, :] - screen_center
    y = r * np.sin(grid.phi)[None, :]
    rp_sq = x * x + y * y
    field = field * np.exp(0.5j * k * rp_sq / focal_length_m)
    if aperture_radius_m is not None:
        power_before = float(grid.integrate(np.abs(field) ** 2))
        field = np.where(rp_sq <= aperture_radius_m**2, field, 0.0)
        power_after = float(grid.integrate(np.abs(field) ** 2))
        aperture_loss = power_before - power_after
    else:
        power_after = float(grid.integrate(np.abs(field) ** 2))
        aperture_loss = 0.0

    out = decompose(
        field, res, expansion.truncation_n, grid=grid, plane_z_m=z_out
    )
    truncation_loss = power_after - out.power
    return LensTransferResult(
        expansion=out, aperture_loss=aperture_loss, truncation_loss=truncation_loss
    )
