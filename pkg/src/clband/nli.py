"""Nonlinear-interference coefficient per span: GN integral and closed form.

The authoritative route, ``compute_nli_coefficient``, evaluates the
ISRS-GN double integral numerically:

    G_NLI(f_i) = (16/27) gamma^2 *
        iint G(f1) G(f2) G(f1+f2-f_i) |LK(f1, f2, f_i)|^2 df1 df2

    LK = int_0^L sqrt(rho(z,f1) rho(z,f2) rho(z,f1+f2-f_i) / rho(z,f_i))
         * exp(j dbeta z) dz

    dbeta = -4 pi^2 (f1-f_i)(f2-f_i) [beta2 + pi beta3 (f1+f2)]

with rho the normalized triangular-ISRS power profile, and

    eta(f_i) = G_NLI(f_i) * B_i / P_i^3.

Under the triangular profile the rho ratio collapses to a function of
z and s = f1+f2-2*f_cog alone, so the z integral ("link kernel") is a
Fourier-type integral of a smooth envelope; it is evaluated with a
Filon-type rule that treats the oscillation exactly on each z segment.
The (f1, f2) domain is covered cell-by-cell: the self-channel square and
the pump strips along both axes (where the integrand ridge lives) with
log-refined nodes toward the ridge, plus a halo of four-wave-mixing corner
cells; the neglected far tail is bounded analytically and must stay below
``QuadratureSettings.mci_tail_tol`` of the accumulated integral.

``closed_form_eta`` is the per-span incoherent closed-form approximation
(rectangular channels, triangular Raman slope) used as the fast path in
optimization loops; the test suite validates it against the integral.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import PhysicsError, QuadratureError
from .isrs import _check_launch, power_weighted_cog_hz


@dataclass(frozen=True)
class QuadratureSettings:
    """Resolution knobs for the numerical GN integral."""

    z_knots: int = 257               # Filon envelope knots over the span
    points_per_decade: int = 10      # log density toward the ridge
    f_min_hz: float = 3e4            # inner cutoff of the log grids
    pump_points: int = 13            # linear nodes across a pump channel
    corner_halo: int = 3             # FWM corner cells kept per side
    rel_tol: float = 0.02            # half-resolution self-check bound
    mci_tail_tol: float = 0.01       # allowed truncated-tail fraction
    error_check: bool = True

    def coarser(self):
        return replace(
            self,
            z_knots=self.z_knots // 2 + 1,
            points_per_decade=max(4, self.points_per_decade // 2),
            pump_points=max(5, self.pump_points // 2 + 1),
            error_check=False,
        )


@dataclass(frozen=True)
class NliCoefficient:
    """Per-span NLI coefficient (1/W^2) with its diagnostic decomposition."""

    eta_per_w2: float
    self_channel: float
    cross_channel: float
    estimated_rel_err: float | None = None


def _filon_phis(theta):
    """phi1=(e^{jt}-1)/(jt), phi2=(e^{jt}(jt-1)+1)/(jt)^2 with stable small-t series."""
    theta = np.asarray(theta, dtype=float)
    jt = 1j * theta
    small = np.abs(theta) < 1e-4
    safe = np.where(small, 1.0, jt)
    e = np.exp(jt)
    p1 = np.where(small, 1.0 + jt / 2 - theta**2 / 6, (e - 1.0) / safe)
    p2 = np.where(small, 0.5 + jt / 3 - theta**2 / 8, (e * (jt - 1.0) + 1.0) / safe**2)
    return p1, p2


class _LinkKernel:
    """LK(u, v) for one channel of interest over one span.

    u = f1 - f_i and v = f2 - f_i, both relative to the channel center;
    frequencies inside are referenced to the power-weighted spectral center
    of gravity where beta2/beta3 are defined.
    """

    def __init__(self, grid, fiber, launch_w, f_i_rel, quad):
        z = np.linspace(0.0, fiber.span_length_m, quad.z_knots)
        alpha = float(np.sum(fiber.alpha_np_m_per_channel(grid) * launch_w) / launch_w.sum())
        ptot = launch_w.sum()
        f_rel = grid.center_hz - power_weighted_cog_hz(grid, launch_w)
        leff = (1.0 - np.exp(-alpha * z)) / alpha if alpha > 0 else z.copy()
        b = ptot * fiber.raman_slope_w_m_hz * leff
        norm = ptot / np.sum(launch_w[None, :] * np.exp(-np.outer(b, f_rel)), axis=1)
        self.z = z
        self.dz = z[1] - z[0]
        self.span_length = fiber.span_length_m
        self.base = np.exp(-alpha * z) * norm          # e^{-az} C(z)
        self.b = b                                     # P_tot Cr Leff(z)
        self.f_i = f_i_rel
        self.beta2 = fiber.beta2_s2_m
        self.beta3 = fiber.beta3_s3_m
        self._phase = None  # cached e^{jwz} grid is rebuilt per call

    def lk2(self, u, v):
        """|LK|^2 for flat arrays of (u, v) nodes."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        f1f2 = u + v + 2.0 * self.f_i
        w = -4.0 * np.pi**2 * u * v * (self.beta2 + np.pi * self.beta3 * f1f2)
        s = u + v + self.f_i
        g = self.base[None, :] * np.exp(-np.outer(s, self.b))
        theta = w * self.dz
        p1, p2 = _filon_phis(theta)
        phase = np.exp(1j * np.outer(w, self.z[:-1]))
        s0 = np.sum(g[:, :-1] * phase, axis=1)
        s1 = np.exp(-1j * theta) * (
            s0 - g[:, 0] + g[:, -1] * np.exp(1j * w * self.span_length)
        )
        lk = self.dz * ((p1 - p2) * s0 + p2 * s1)
        return np.abs(lk) ** 2

    def envelope_bound(self, s_min):
        """max_z of the envelope g(z; s) = base(z) e^{-b(z) s} for s >= s_min.

        b(z) >= 0 grows monotonically, so the exponential factor peaks at
        e^{-b_max s_min} when s_min < 0 and at 1 otherwise.
        """
        boost = np.exp(self.b.max() * np.maximum(0.0, -np.asarray(s_min)))
        return self.base.max() * boost


def _psd_lookup(centers_rel, powers, bsig, f):
    """Comb PSD (W/Hz) at relative frequencies f: rectangles of width bsig."""
    f = np.atleast_1d(np.asarray(f, dtype=float))
    if len(centers_rel) == 1:
        pick = np.zeros(f.shape, dtype=int)
    else:
        idx = np.clip(np.searchsorted(centers_rel, f), 1, len(centers_rel) - 1)
        left = idx - 1
        pick = np.where(
            np.abs(f - centers_rel[left]) <= np.abs(f - centers_rel[idx]), left, idx
        )
    val = np.where(
        np.abs(f - centers_rel[pick]) <= bsig / 2 + 1e-3, powers[pick] / bsig, 0.0
    )
    return val


def _segment_bounds(centers_rel, powers, bsig, lo, hi):
    """Split [lo, hi] at PSD discontinuities (signal-band edges)."""
    edges = np.concatenate([centers_rel - bsig / 2, centers_rel + bsig / 2])
    inside = edges[(edges > lo + 1e-6) & (edges < hi - 1e-6)]
    return np.concatenate([[lo], np.sort(inside), [hi]])


def _ridge_nodes(lo, hi, quad):
    """Nodes over [lo, hi] log-refined toward v=0, including both endpoints."""
    top = max(abs(lo), abs(hi))
    n = 1 + int(np.ceil(quad.points_per_decade * np.log10(top / quad.f_min_hz)))
    side = np.geomspace(quad.f_min_hz, top, max(n, 4))
    nodes = np.concatenate([-side[::-1], [0.0], side, [lo, hi]])
    nodes = np.unique(np.clip(nodes, lo, hi))
    return nodes


def _v_integral(ker, centers_rel, powers, bsig, u, v_lo, v_hi, quad, ridge):
    """int_{v_lo}^{v_hi} G3(u+v) |LK(u,v)|^2 dv for each u (same v limits).

    G3 is constant between signal-band edges, so the integral runs per
    segment with the segment's exact PSD value; |LK|^2 is trapezoid-
    integrated on ridge-refined (or linear) nodes.
    """
    total = np.zeros(len(u))
    off = ker.f_i
    for k in range(len(u)):
        segs = _segment_bounds(centers_rel, powers, bsig, u[k] + v_lo + off, u[k] + v_hi + off)
        segs = segs - (u[k] + off)  # back to v coordinates
        base_nodes = _ridge_nodes(v_lo, v_hi, quad) if ridge else None
        seg_nodes = []
        seg_g3 = []
        for a, b in zip(segs[:-1], segs[1:]):
            g3 = _psd_lookup(centers_rel, powers, bsig, u[k] + 0.5 * (a + b) + off)[0]
            if g3 == 0.0:
                continue
            if ridge:
                nodes = np.unique(np.clip(base_nodes, a, b))
                if len(nodes) < 2:
                    nodes = np.array([a, b])
            else:
                nodes = np.linspace(a, b, 9)
            seg_nodes.append(nodes)
            seg_g3.append(g3)
        if not seg_nodes:
            continue
        flat = np.concatenate(seg_nodes)
        lk2 = ker.lk2(np.full(len(flat), u[k]), flat)
        acc, pos = 0.0, 0
        for nodes, g3 in zip(seg_nodes, seg_g3):
            acc += g3 * np.trapezoid(lk2[pos : pos + len(nodes)], nodes)
            pos += len(nodes)
        total[k] = acc
    return total


def _mci_tail_bound(ker, centers_rel, powers, bsig, i, quad):
    """Upper bound on the four-wave-mixing cells dropped beyond the halo.

    Each dropped cell (k1, k2) has both axes at least one channel away
    from the ridge, where |LK| <= c_env/|w| by integration by parts; the
    1/(u v)^2 ceiling integrates in closed form over the cell.  The
    envelope constant and the dispersion factor are evaluated per cell
    pair, since only the lowest-frequency pump pairs ever see the ISRS
    gain boost.  Cells outside the comb carry no spectral density and
    contribute exactly zero, so a sparse plan has no tail at all.
    """
    halo = quad.corner_halo
    n = len(centers_rel)
    f_i = centers_rel[i]
    d = np.abs(centers_rel - f_i)
    idx = np.arange(n)
    usable = (powers > 0) & (idx != i)
    if usable.sum() == 0:
        return 0.0
    lo = np.maximum(d - bsig / 2, bsig / 4)
    hi = d + bsig / 2
    gmax = powers.max() / bsig
    w = np.where(usable, (powers / bsig) * (1.0 / lo - 1.0 / hi), 0.0)
    in_halo = usable & (np.abs(idx - i) <= halo)
    drop = np.outer(w, w)
    drop[np.ix_(in_halo, in_halo)] = 0.0  # integrated explicitly
    # per-pair envelope: s = u + v + f_i >= f_k1 + f_k2 - f_i - bsig
    s_min = centers_rel[:, None] + centers_rel[None, :] - f_i - bsig
    c_env = 1.0 + 3.0 * ker.envelope_bound(s_min)
    # per-pair dispersion: |beta2 + pi beta3 (f1 + f2)| at the cell center
    f12 = centers_rel[:, None] + centers_rel[None, :]
    c2 = 4.0 * np.pi**2 * np.maximum(
        np.abs(ker.beta2 + np.pi * ker.beta3 * f12), 0.1 * abs(ker.beta2)
    )
    return float(gmax * np.sum(drop * (c_env / c2) ** 2))


def _eta_integral(grid, fiber, launch_w, channel_index, quad):
    powers = launch_w
    grid.channel(channel_index)  # validates the index
    i = channel_index - 1
    cog = power_weighted_cog_hz(grid, powers)
    centers_rel = grid.center_hz - cog
    f_i = centers_rel[i]
    bsig = grid.signal_bandwidth_hz
    ker = _LinkKernel(grid, fiber, powers, f_i, quad)
    gamma = fiber.gamma_w_m

    g_i = _psd_lookup(centers_rel, powers, bsig, f_i)[0]
    self_part = 0.0
    cross_part = 0.0

    for k in range(grid.n_channels):
        if powers[k] <= 0:
            continue
        du = centers_rel[k] - f_i
        if k == i:
            u_nodes = _ridge_nodes(-bsig / 2, bsig / 2, quad)
        else:
            u_nodes = du + np.linspace(-bsig / 2, bsig / 2, quad.pump_points)
        g1 = _psd_lookup(centers_rel, powers, bsig, u_nodes + f_i)
        fv = _v_integral(ker, centers_rel, powers, bsig, u_nodes, -bsig / 2, bsig / 2, quad, ridge=True)
        val = np.trapezoid(g1 * g_i * fv, u_nodes)
        if k == i:
            self_part += val
        else:
            cross_part += 2.0 * val  # u<->v symmetry covers the mirrored strip

    # four-wave-mixing corner cells around the channel of interest
    halo = quad.corner_halo
    for k1 in range(max(0, i - halo), min(grid.n_channels, i + halo + 1)):
        if k1 == i or powers[k1] <= 0:
            continue
        d1 = centers_rel[k1] - f_i
        u_nodes = d1 + np.linspace(-bsig / 2, bsig / 2, 9)
        g1 = _psd_lookup(centers_rel, powers, bsig, u_nodes + f_i)
        for k2 in range(max(0, i - halo), min(grid.n_channels, i + halo + 1)):
            if k2 == i or powers[k2] <= 0:
                continue
            d2 = centers_rel[k2] - f_i
            g2 = powers[k2] / bsig
            fv = _v_integral(
                ker, centers_rel, powers, bsig,
                u_nodes, d2 - bsig / 2, d2 + bsig / 2, quad, ridge=False,
            )
            cross_part += np.trapezoid(g1 * g2 * fv, u_nodes)

    tail = _mci_tail_bound(ker, centers_rel, powers, bsig, i, quad)
    scale = (16.0 / 27.0) * gamma**2 * bsig / powers[i] ** 3
    total = self_part + cross_part
    if total > 0 and tail / total > quad.mci_tail_tol:
        raise QuadratureError(
            f"truncated FWM tail bound {tail / total:.2%} exceeds "
            f"{quad.mci_tail_tol:.0%}; increase corner_halo"
        )
    return scale * self_part, scale * cross_part


def compute_nli_coefficient(
    grid, fiber, launch_w, channel_index, fmt=None,
    correction_enabled=False, quad=None,
):
    """Numerically evaluate the per-span NLI coefficient of one channel.

    Returns an NliCoefficient in 1/W^2.  With ``correction_enabled`` and a
    modulation format given, the closed-form excess-kurtosis correction is
    added to the cross-channel part (the correction addend is shared with
    the closed-form fast path; the GN integral itself is the independent
    route).  Raises QuadratureError when the half-resolution self-check
    disagrees beyond ``quad.rel_tol`` or the truncated tail bound is too
    large.
    """
    p = _check_launch(launch_w, grid.n_channels)
    if p[channel_index - 1] <= 0:
        raise PhysicsError(f"channel {channel_index} carries no power")
    if fiber.gamma_w_m == 0.0:
        return NliCoefficient(0.0, 0.0, 0.0, 0.0)
    quad = quad or QuadratureSettings()

    self_part, cross_part = _eta_integral(grid, fiber, p, channel_index, quad)
    eta = self_part + cross_part
    rel_err = None
    if quad.error_check:
        s2, c2 = _eta_integral(grid, fiber, p, channel_index, quad.coarser())
        coarse = s2 + c2
        rel_err = abs(coarse - eta) / eta if eta > 0 else 0.0
        if rel_err > quad.rel_tol:
            raise QuadratureError(
                f"GN quadrature self-check: {rel_err:.2%} relative change at half "
                f"resolution exceeds rel_tol={quad.rel_tol:.2%} "
                f"(channel {channel_index})"
            )
    if correction_enabled and fmt is not None and fmt.excess_kurtosis != 0.0:
        corr = _kurtosis_correction(grid, fiber, p, fmt.excess_kurtosis)
        cross_part += float(corr[channel_index - 1])
        eta = self_part + cross_part
    return NliCoefficient(float(eta), float(self_part), float(cross_part), rel_err)


# ---------------------------------------------------------------------------
# closed-form fast path

def _isrs_t_factor(alpha, alpha_bar, f_rel, ptot, cr):
    return (alpha + alpha_bar - f_rel * ptot * cr) ** 2


def closed_form_eta(grid, fiber, launch_w, interferer_kurtosis=0.0):
    """Per-span NLI coefficients of every channel, closed form.

    Incoherent per-span accumulation; rectangular channels of the grid's
    signal bandwidth; triangular Raman slope enters through the usual
    first-order tilt factor.  ``interferer_kurtosis`` != 0 adds the
    modulation-format cross-channel correction (Gaussian interferers have
    kurtosis 0, which is the ASE-loading default).

    Returns (eta, spm, xpm) arrays of shape (n_channels,).
    """
    p = _check_launch(launch_w, grid.n_channels)
    n = grid.n_channels
    if fiber.gamma_w_m == 0.0:
        z = np.zeros(n)
        return z, z.copy(), z.copy()
    a = fiber.alpha_np_m_per_channel(grid)
    a_bar = a
    beta2, beta3 = fiber.beta2_s2_m, fiber.beta3_s3_m
    gamma = fiber.gamma_w_m
    cr = fiber.raman_slope_w_m_hz
    bsig = grid.signal_bandwidth_hz
    f = grid.center_hz - power_weighted_cog_hz(grid, p)
    ptot = p.sum()

    t = _isrs_t_factor(a, a_bar, f, ptot, cr)
    phi_i = 1.5 * np.pi**2 * (beta2 + np.pi * beta3 * 2 * f)
    spm = (4 / 9) * (gamma**2 / bsig**2) * np.pi / (phi_i * a_bar * (2 * a + a_bar)) * (
        (t - a**2) / a * np.arcsinh(phi_i * bsig**2 / a / np.pi)
        + ((a + a_bar) ** 2 - t) / (a + a_bar)
        * np.arcsinh(phi_i * bsig**2 / (a + a_bar) / np.pi)
    )
    spm = np.where(p > 0, spm, 0.0)

    fi = f[:, None]
    fk = f[None, :]
    ak = a[None, :]
    ak_bar = a_bar[None, :]
    tk = t[None, :]
    phi_ik = 2 * np.pi**2 * (fk - fi) * (beta2 + np.pi * beta3 * (fi + fk))
    with np.errstate(divide="ignore", invalid="ignore"):
        pr = np.where(p[:, None] > 0, p[None, :] / np.where(p[:, None] > 0, p[:, None], 1.0), 0.0)
        bracket = (
            (tk - ak**2) / ak * np.arctan(phi_ik * bsig / ak)
            + ((ak + ak_bar) ** 2 - tk) / (ak + ak_bar)
            * np.arctan(phi_ik * bsig / (ak + ak_bar))
        ) / (bsig * phi_ik * ak_bar * (2 * ak + ak_bar))
    np.fill_diagonal(bracket, 0.0)
    bracket = np.where(p[None, :] > 0, bracket, 0.0)
    xpm = (32 / 27) * gamma**2 * np.sum(pr**2 * bracket, axis=1)
    if interferer_kurtosis != 0.0:
        xpm = xpm + _kurtosis_correction(grid, fiber, p, interferer_kurtosis)
    eta = spm + xpm
    return eta, spm, xpm


def _kurtosis_correction(grid, fiber, p, kurtosis):
    """Excess-kurtosis cross-channel correction (per span, incoherent)."""
    a = fiber.alpha_np_m_per_channel(grid)
    a_bar = a
    beta2, beta3 = fiber.beta2_s2_m, fiber.beta3_s3_m
    gamma = fiber.gamma_w_m
    bsig = grid.signal_bandwidth_hz
    f = grid.center_hz - power_weighted_cog_hz(grid, p)
    ptot = p.sum()
    t = _isrs_t_factor(a, a_bar, f, ptot, fiber.raman_slope_w_m_hz)
    fi = f[:, None]
    fk = f[None, :]
    ak = a[None, :]
    ak_bar = a_bar[None, :]
    tk = t[None, :]
    phi_ik = 2 * np.pi**2 * (fk - fi) * (beta2 + np.pi * beta3 * (fi + fk))
    with np.errstate(divide="ignore", invalid="ignore"):
        pr = np.where(p[:, None] > 0, p[None, :] / np.where(p[:, None] > 0, p[:, None], 1.0), 0.0)
        bracket = (
            (tk - ak**2) / ak * np.arctan(phi_ik * bsig / ak)
            + ((ak + ak_bar) ** 2 - tk) / (ak + ak_bar)
            * np.arctan(phi_ik * bsig / (ak + ak_bar))
        ) / (bsig * phi_ik * ak_bar * (2 * ak + ak_bar))
    np.fill_diagonal(bracket, 0.0)
    bracket = np.where(p[None, :] > 0, bracket, 0.0)
    return kurtosis * (80 / 81) * gamma**2 * np.sum(pr**2 * bracket, axis=1)
