"""Evolution equations: incompressible viscous resistive Hall MHD in 3-d and
with 2-d variables, the electron MHD reduction (vector and stream forms),
the decoupled magnetic equation, and the magneto-vorticity transport law.

All nonlinear terms are evaluated pseudo-spectrally (derivatives in mode
space, products at collocation points) and dealiased; the pressure gradient
is eliminated by Leray projection and never stored.  Tendencies can be
requested with or without the diffusive part so an integrating-factor
stepper can treat diffusion exactly.

Sign conventions for the 2-d stream form, fixed once and pinned by the
vector/stream equivalence tests: perp_grad(f) = (d2 f, -d1 f), the magnetic
field is (d2 psi, -d1 psi, b3), and (curl B)_3 = -lap(psi).
"""

from dataclasses import dataclass

import numpy as np

from hallmhd import kernels
from hallmhd._fft import fftn, ifftn
from hallmhd.spectral import (
    PeriodicGrid,
    SpectralScalar,
    SpectralVector,
    curl,
    divergence_defect,
    mean_coeff,
    vector_potential,
)

# Relative divergence defect beyond which an allegedly solenoidal input is
# rejected by the RHS evaluators.
DIV_TOL = 1e-8


@dataclass(frozen=True)
class PhysParams:
    """Nondimensional viscosity, resistivity and Hall constant."""

    nu: float
    eta: float
    hall: float = 1.0

    def __post_init__(self):
        for name in ("nu", "eta", "hall"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v}")


# Per-model field layout: name -> (kind, diffusion coefficient attribute).
# Fields with kind "vector" are re-projected divergence-free by the stepper.
MODEL_FIELDS = {
    "hall3d": {"u": ("vector", "nu"), "b": ("vector", "eta")},
    "hall25d": {"u": ("vector", "nu"), "b": ("vector", "eta")},
    "emhd_vector": {"b": ("vector", "eta")},
    "emhd_stream": {"psi": ("scalar", "eta"), "b3": ("scalar", "eta")},
    "hmhd_stream": {
        "phi": ("scalar", None),
        "u3": ("scalar", None),
        "psi": ("scalar", "eta"),
        "b3": ("scalar", "eta"),
    },
    "decoupled_b": {"b": ("vector", "nu")},
    "magneto_vorticity": {
        "omega_plus_b": ("vector", "nu"),
        "u": ("vector", None),
        "b": ("vector", None),
    },
}

MODEL_DIM = {
    "hall3d": 3,
    "hall25d": 2,
    "emhd_vector": 2,
    "emhd_stream": 2,
    "hmhd_stream": 2,
    "decoupled_b": 3,
    "magneto_vorticity": None,  # either
}

# Models the time stepper accepts ("hmhd_stream" produces only the magnetic
# tendencies and "magneto_vorticity" is a frozen-coefficient diagnostic).
STEPPABLE_MODELS = ("hall3d", "hall25d", "emhd_vector", "emhd_stream", "decoupled_b")


@dataclass
class MhdState:
    """Model-tagged bundle of spectral fields at a given time."""

    model: str
    fields: dict
    time: float = 0.0

    def copy(self) -> "MhdState":
        return MhdState(self.model, {k: v.copy() for k, v in self.fields.items()},
                        self.time)

    @property
    def grid(self) -> PeriodicGrid:
        return next(iter(self.fields.values())).grid


def validate_state(state: MhdState, div_tol: float = DIV_TOL) -> None:
    """Check tag, field layout, grid dimensionality and solenoidal invariants."""
    layout = MODEL_FIELDS.get(state.model)
    if layout is None:
        raise ValueError(f"unknown model tag {state.model!r}")
    if set(state.fields) != set(layout):
        raise ValueError(
            f"model {state.model!r} requires fields {sorted(layout)}, "
            f"got {sorted(state.fields)}")
    grid = state.grid
    want_dim = MODEL_DIM[state.model]
    if want_dim is not None and grid.dim != want_dim:
        raise ValueError(f"model {state.model!r} requires a {want_dim}-d grid")
    if state.time < 0:
        raise ValueError("time must be >= 0")
    for name, (kind, _) in layout.items():
        f = state.fields[name]
        want = SpectralVector if kind == "vector" else SpectralScalar
        if not isinstance(f, want):
            raise ValueError(f"field {name!r} must be a {want.__name__}")
        if f.grid != grid:
            raise ValueError(f"field {name!r} lives on a different grid")
        if kind == "vector":
            defect = divergence_defect(f)
            if defect > div_tol:
                raise ValueError(
                    f"field {name!r} is not divergence-free "
                    f"(relative defect {defect:.3e})")


# ---------------------------------------------------------------------------
# pseudo-spectral building blocks (flattened-array helpers)
# ---------------------------------------------------------------------------

def _to_phys_flat(field_obj) -> np.ndarray:
    """Physical collocation values, flattened to (m,) or (3, m)."""
    grid = field_obj.grid
    if isinstance(field_obj, SpectralScalar):
        return np.ascontiguousarray(ifftn(field_obj.coeffs).real.reshape(-1))
    axes = tuple(range(1, grid.dim + 1))
    return np.ascontiguousarray(
        ifftn(field_obj.coeffs, axes=axes).real.reshape(3, -1))


def _phys_from_flat(grid, flat) -> np.ndarray:
    """Inverse transform of flattened coefficients to physical values."""
    if flat.ndim == 1:
        return np.ascontiguousarray(ifftn(flat.reshape(grid.shape)).real.reshape(-1))
    axes = tuple(range(1, grid.dim + 1))
    return np.ascontiguousarray(
        ifftn(flat.reshape((flat.shape[0],) + grid.shape), axes=axes)
        .real.reshape(flat.shape[0], -1))


def _fft_flat(grid, flat):
    """Forward transform of flattened physical values, dealiased."""
    if flat.ndim == 1:
        out = fftn(flat.reshape(grid.shape)).reshape(-1)
        out *= grid.maskflat_f
        return out
    axes = tuple(range(1, grid.dim + 1))
    out = fftn(flat.reshape((flat.shape[0],) + grid.shape), axes=axes)
    out = out.reshape(flat.shape[0], -1)
    out *= grid.maskflat_f[np.newaxis, :]
    return out


def _grad_phys(grid, coeffs_flat, directions) -> np.ndarray:
    """Directional derivatives of one spectral component at collocation points.

    Returns an array of shape (len(directions), m).
    """
    out = np.empty((len(directions), grid.npoints))
    for j, axis in enumerate(directions):
        d = 1j * grid.kflat[axis] * coeffs_flat
        out[j] = ifftn(d.reshape(grid.shape)).real.reshape(-1)
    return out


def _vector_grad_phys(grid, vflat, directions) -> np.ndarray:
    """Gradients of all three components: shape (len(directions), 3, m)."""
    out = np.empty((len(directions), 3, grid.npoints))
    for c in range(3):
        g = _grad_phys(grid, vflat[c], directions)
        for j in range(len(directions)):
            out[j, c] = g[j]
    return out


def _advect_flat(grid, adv_phys, grad_phys, form,
                 targets_phys=None) -> np.ndarray:
    """(adv . grad) target at collocation points, spectral and dealiased.

    ``adv_phys`` has shape (nadv, m) and ``grad_phys`` (nadv, ncomp, m) in
    convective form.  In divergence form the products adv_c * target_j are
    differentiated spectrally instead (equivalent for solenoidal advectors);
    ``targets_phys`` (ncomp, m) must then be supplied.
    """
    if form == "convective":
        prod = kernels.advect(adv_phys, grad_phys)
        return _fft_flat(grid, prod)
    if form != "divergence":
        raise ValueError(f"unknown advection form {form!r}")
    nadv = adv_phys.shape[0]
    ncomp = targets_phys.shape[0]
    out = np.zeros((ncomp, grid.npoints), dtype=np.complex128)
    for c in range(nadv):
        prods = adv_phys[c][np.newaxis, :] * targets_phys
        prods_hat = _fft_flat(grid, prods)
        out += 1j * grid.kflat[c][np.newaxis, :] * prods_hat
    return out


def _jacobian_hat(grid, f: SpectralScalar, g: SpectralScalar) -> np.ndarray:
    """Spectral Jacobian J(f, g) = d1 f d2 g - d2 f d1 g, dealiased (flat).

    Equals grad(f) . perp_grad(g) with perp_grad = (d2, -d1).
    """
    f1 = ifftn((1j * grid.kvec[0] * f.coeffs)).real
    f2 = ifftn((1j * grid.kvec[1] * f.coeffs)).real
    g1 = ifftn((1j * grid.kvec[0] * g.coeffs)).real
    g2 = ifftn((1j * grid.kvec[1] * g.coeffs)).real
    prod = (f1 * g2 - f2 * g1).reshape(-1)
    return _fft_flat(grid, np.ascontiguousarray(prod))


def jacobian(f: SpectralScalar, g: SpectralScalar) -> SpectralScalar:
    """Dealiased Jacobian J(f, g) = d1 f d2 g - d2 f d1 g on a 2-d grid."""
    grid = f.grid
    if grid != g.grid:
        raise ValueError("grid mismatch between fields")
    if grid.dim != 2:
        raise ValueError("the Jacobian bracket is defined on 2-d grids only")
    return SpectralScalar(grid, _jacobian_hat(grid, f, g).reshape(grid.shape))


def _check_divfree(v: SpectralVector, name: str) -> None:
    defect = divergence_defect(v)
    if defect > DIV_TOL:
        raise ValueError(f"{name} must be divergence-free "
                         f"(relative defect {defect:.3e})")


# ---------------------------------------------------------------------------
# force terms
# ---------------------------------------------------------------------------

def lorentz_force(b: SpectralVector) -> SpectralVector:
    """(curl b) x b, computed pseudo-spectrally and dealiased."""
    grid = b.grid
    j = curl(b)
    out = kernels.cross3(_to_phys_flat(j), _to_phys_flat(b))
    return SpectralVector(grid, _fft_flat(grid, out).reshape((3,) + grid.shape))


def hall_term(b: SpectralVector) -> SpectralVector:
    """curl((curl b) x b), dealiased."""
    return curl(lorentz_force(b))


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------

def _two_field_rhs(state: MhdState, p: PhysParams, include_diffusion: bool,
                   transport_form: str, hall_form: str, validate: bool) -> dict:
    """Shared tendency of the coupled (u, B) system in 3-d or 2-d variables.

    du/dt = P[-(u.grad)u + (curl B) x B] + nu lap u
    dB/dt = eta lap B - (u.grad)B + (B.grad)u - h curl((curl B) x B)

    The default "rotational" transport evaluates P[u x curl(u)] and
    curl(u x B), which agree with the convective form to rounding for
    band-limited fields (the dealias mask keeps every quadratic product
    alias-free) at roughly half the transform count.  "convective" and
    "divergence" are kept for energy-conservation comparisons.  The Hall
    contribution is curl((curl B) x B) literally; on 2-d grids
    hall_form="component" assembles it from the in-plane/out-of-plane
    current components instead (cross-checked against the literal form).
    """
    grid = state.grid
    u, b = state.fields["u"], state.fields["b"]
    if validate:
        _check_divfree(u, "u")
        _check_divfree(b, "b")

    uflat = np.ascontiguousarray(u.flat)
    bflat = np.ascontiguousarray(b.flat)
    if hall_form not in ("literal", "component"):
        raise ValueError(f"unknown hall form {hall_form!r}")
    if hall_form == "component" and grid.dim != 2:
        raise ValueError("component Hall assembly requires 2-d variables")

    if transport_form == "rotational" and hall_form == "literal":
        # Fast path: one batched synthesis of (u, B, curl u, curl B), three
        # pointwise cross products, one batched analysis of the two sources.
        m = grid.npoints
        stack = np.empty((12, m), dtype=np.complex128)
        stack[0:3] = uflat
        stack[3:6] = bflat
        stack[6:9] = kernels.curl_mode(grid.kflat, uflat)
        stack[9:12] = kernels.curl_mode(grid.kflat, bflat)
        phys = _phys_from_flat(grid, stack)
        u_phys, b_phys = phys[0:3], phys[3:6]
        w_phys, j_phys = phys[6:9], phys[9:12]
        jxb = kernels.cross3(j_phys, b_phys)
        src = np.empty((6, m))
        src[0:3] = kernels.cross3(u_phys, w_phys)
        src[0:3] += jxb
        src[3:6] = kernels.cross3(u_phys, b_phys)
        if p.hall != 0.0:
            src[3:6] -= p.hall * jxb
        src_hat = _fft_flat(grid, src)
        du = kernels.project_mode(grid.kflat, grid.inv_k2flat, src_hat[0:3])
        db = kernels.curl_mode(grid.kflat, src_hat[3:6])
    else:
        u_phys = _to_phys_flat(u)
        b_phys = _to_phys_flat(b)
        j_phys = _phys_from_flat(grid, kernels.curl_mode(grid.kflat, bflat))
        lorentz_hat = _fft_flat(grid, kernels.cross3(j_phys, b_phys))
        if transport_form == "rotational":
            omega_phys = _phys_from_flat(grid,
                                         kernels.curl_mode(grid.kflat, uflat))
            du = _fft_flat(grid, kernels.cross3(u_phys, omega_phys))
            du += lorentz_hat
            uxb_hat = _fft_flat(grid, kernels.cross3(u_phys, b_phys))
            db = kernels.curl_mode(grid.kflat, np.ascontiguousarray(uxb_hat))
        elif transport_form in ("convective", "divergence"):
            dirs = list(range(grid.dim))
            grad_u = _vector_grad_phys(grid, uflat, dirs)
            grad_b = _vector_grad_phys(grid, bflat, dirs)
            adv_u = np.ascontiguousarray(u_phys[: grid.dim])
            adv_b = np.ascontiguousarray(b_phys[: grid.dim])
            du = -_advect_flat(grid, adv_u, grad_u, transport_form,
                               targets_phys=u_phys)
            if grid.dim == 2:
                # In 2-d variables the Lorentz force reduces to the magnetic
                # stretch (bt.grad)B up to a gradient absorbed by projection.
                du += _advect_flat(grid, adv_b, grad_b, transport_form,
                                   targets_phys=b_phys)
            else:
                du += lorentz_hat
            db = -_advect_flat(grid, adv_u, grad_b, transport_form,
                               targets_phys=b_phys)
            db += _advect_flat(grid, adv_b, grad_u, transport_form,
                               targets_phys=u_phys)
        else:
            raise ValueError(f"unknown transport form {transport_form!r}")

        du = kernels.project_mode(grid.kflat, grid.inv_k2flat,
                                  np.ascontiguousarray(du))
        if p.hall != 0.0:
            if hall_form == "literal":
                hall_hat = kernels.curl_mode(grid.kflat,
                                             np.ascontiguousarray(lorentz_hat))
            else:
                grad_b = _vector_grad_phys(grid, bflat, [0, 1])
                hall_hat = _hall_terms_25d(grid, b, b_phys, grad_b)
            db -= p.hall * hall_hat

    if include_diffusion:
        kernels.add_weighted(du, grid.k2flat, -p.nu, uflat)
        kernels.add_weighted(db, grid.k2flat, -p.eta, bflat)

    shape = (3,) + grid.shape
    return {"u": SpectralVector(grid, du.reshape(shape)),
            "b": SpectralVector(grid, db.reshape(shape))}


def rhs_hall_mhd_3d(state: MhdState, p: PhysParams, include_diffusion: bool = True,
                    transport_form: str = "rotational",
                    validate: bool = True) -> dict:
    """Tendency of the 3-d coupled system (see _two_field_rhs).

    Both tendencies are divergence-free to rounding; all products dealiased.
    """
    if state.grid.dim != 3:
        raise ValueError("hall3d requires a 3-d grid")
    return _two_field_rhs(state, p, include_diffusion, transport_form,
                          "literal", validate)


def rhs_hall_mhd_25d(state: MhdState, p: PhysParams, include_diffusion: bool = True,
                     transport_form: str = "rotational",
                     hall_form: str = "literal", validate: bool = True) -> dict:
    """Tendency of the system in 2-d variables: three components on a 2-d
    grid, Hall contribution from the in-plane current jt = (d2 b3, -d1 b3)
    and j3 = d1 b2 - d2 b1 (equivalently the literal curl form)."""
    if state.grid.dim != 2:
        raise ValueError("hall25d requires a 2-d grid")
    return _two_field_rhs(state, p, include_diffusion, transport_form,
                          hall_form, validate)


def _hall_terms_25d(grid, b, b_phys, grad_b) -> np.ndarray:
    """Hall contribution (bt.grad jt - jt.grad bt, bt.grad j3) as (3, m) modes.

    jt = (d2 b3, -d1 b3) is read off grad_b; grad(jt) comes from the second
    derivatives of b3 and grad(j3) from one extra derivative of j3.
    """
    m = grid.npoints
    bt = np.ascontiguousarray(b_phys[:2])
    # jt at collocation points: (d2 b3, -d1 b3)
    jt = np.empty((2, m))
    jt[0] = grad_b[1, 2]
    jt[1] = -grad_b[0, 2]

    # Second derivatives of b3 for grad(jt).
    d11 = ifftn((-grid.kvec[0] ** 2 * b.coeffs[2])).real.reshape(-1)
    d12 = ifftn((-grid.kvec[0] * grid.kvec[1] * b.coeffs[2])).real.reshape(-1)
    d22 = ifftn((-grid.kvec[1] ** 2 * b.coeffs[2])).real.reshape(-1)
    grad_jt = np.empty((2, 2, m))
    grad_jt[0, 0] = d12          # d1 jt1 = d1 d2 b3
    grad_jt[1, 0] = d22          # d2 jt1 = d2 d2 b3
    grad_jt[0, 1] = -d11         # d1 jt2 = -d1 d1 b3
    grad_jt[1, 1] = -d12         # d2 jt2 = -d2 d1 b3

    j3_hat = 1j * (grid.kflat[0] * b.flat[1] - grid.kflat[1] * b.flat[0])
    grad_j3 = np.ascontiguousarray(
        _grad_phys(grid, j3_hat, [0, 1]).reshape(2, 1, m))

    grad_bt = np.ascontiguousarray(grad_b[:2, :2])

    out = np.empty((3, m), dtype=np.complex128)
    # bt.grad jt - jt.grad bt (first two components)
    term = kernels.advect(bt, grad_jt) - kernels.advect(jt, grad_bt)
    out[:2] = _fft_flat(grid, term)
    # bt.grad j3 (third component)
    out[2] = _fft_flat(grid, kernels.advect(bt, grad_j3))[0]
    return out


def rhs_emhd_vector(state: MhdState, p: PhysParams,
                    include_diffusion: bool = True,
                    hall_form: str = "literal", validate: bool = True) -> dict:
    """Electron MHD in 2-d variables: the u == 0 reduction of the Hall system."""
    grid = state.grid
    if grid.dim != 2:
        raise ValueError("emhd_vector requires a 2-d grid")
    b = state.fields["b"]
    if validate:
        _check_divfree(b, "b")
    bflat = np.ascontiguousarray(b.flat)
    b_phys = _to_phys_flat(b)

    if hall_form == "literal":
        j_hat = kernels.curl_mode(grid.kflat, bflat)
        j_phys = _phys_from_flat(grid, j_hat)
        lorentz_hat = _fft_flat(grid, kernels.cross3(j_phys, b_phys))
        hall_hat = kernels.curl_mode(grid.kflat,
                                     np.ascontiguousarray(lorentz_hat))
    elif hall_form == "component":
        grad_b = _vector_grad_phys(grid, bflat, [0, 1])
        hall_hat = _hall_terms_25d(grid, b, b_phys, grad_b)
    else:
        raise ValueError(f"unknown hall form {hall_form!r}")

    db = -p.hall * hall_hat
    if include_diffusion:
        db += -p.eta * grid.k2flat[np.newaxis, :] * bflat
    return {"b": SpectralVector(grid, db.reshape((3,) + grid.shape))}


def rhs_emhd_stream(state: MhdState, p: PhysParams,
                    include_diffusion: bool = True) -> dict:
    """Electron MHD in stream form.

    d psi/dt = eta lap psi - h J(b3, psi)
    d b3/dt  = eta lap b3  + h J(lap psi, psi)

    with J(f, g) = d1 f d2 g - d2 f d1 g.  The psi tendency is mean-zero.
    """
    grid = state.grid
    psi, b3 = state.fields["psi"], state.fields["b3"]
    if grid.dim != 2:
        raise ValueError("stream-form models require a 2-d grid")
    origin = (0, 0)

    dpsi = -p.hall * _jacobian_hat(grid, b3, psi)
    lap_psi = SpectralScalar(grid, -grid.k2 * psi.coeffs)
    db3 = p.hall * _jacobian_hat(grid, lap_psi, psi)

    if include_diffusion:
        dpsi += -p.eta * grid.k2flat * psi.flat
        db3 += -p.eta * grid.k2flat * b3.flat

    dpsi = dpsi.reshape(grid.shape)
    dpsi[origin] = 0.0
    return {"psi": SpectralScalar(grid, dpsi),
            "b3": SpectralScalar(grid, db3.reshape(grid.shape))}


def rhs_hmhd_stream(state: MhdState, p: PhysParams,
                    include_diffusion: bool = True) -> dict:
    """Magnetic tendencies of the Hall system in stream form.

    d psi/dt = eta lap psi - h J(b3, psi) + J(phi, psi)
    d b3/dt  = eta lap b3  + h J(lap psi, psi) - J(b3, phi) + J(u3, psi)

    (phi, u3) describe the frozen velocity (d2 phi, -d1 phi, u3); only the
    magnetic pair evolves here.
    """
    grid = state.grid
    phi, u3 = state.fields["phi"], state.fields["u3"]
    psi, b3 = state.fields["psi"], state.fields["b3"]
    if grid.dim != 2:
        raise ValueError("stream-form models require a 2-d grid")

    dpsi = -p.hall * _jacobian_hat(grid, b3, psi)
    dpsi += _jacobian_hat(grid, phi, psi)
    lap_psi = SpectralScalar(grid, -grid.k2 * psi.coeffs)
    db3 = p.hall * _jacobian_hat(grid, lap_psi, psi)
    db3 -= _jacobian_hat(grid, b3, phi)
    db3 += _jacobian_hat(grid, u3, psi)

    if include_diffusion:
        dpsi += -p.eta * grid.k2flat * psi.flat
        db3 += -p.eta * grid.k2flat * b3.flat

    dpsi = dpsi.reshape(grid.shape)
    dpsi[(0, 0)] = 0.0
    return {"psi": SpectralScalar(grid, dpsi),
            "b3": SpectralScalar(grid, db3.reshape(grid.shape))}


def rhs_decoupled_b(state: MhdState, p: PhysParams,
                    include_diffusion: bool = True,
                    validate: bool = True) -> dict:
    """Closed magnetic evolution on the zero magneto-vorticity manifold.

    dB/dt = nu lap B - curl((A/h + h curl B) x B),  curl A = B, div A = 0.

    At h = 1 this is nu lap B - curl((A + curl B) x B).  Requires B to be
    divergence-free with zero mean (the potential does not exist otherwise).
    """
    grid = state.grid
    b = state.fields["b"]
    if validate:
        _check_divfree(b, "b")
    mean = mean_coeff(b)
    scale = np.max(np.abs(b.flat))
    if np.max(np.abs(mean)) > 1e-12 * max(1.0, scale):
        raise ValueError("decoupled magnetic model requires a mean-zero field")
    if p.hall == 0.0:
        raise ValueError("decoupled magnetic model requires hall > 0")

    a = vector_potential(b)
    j = curl(b)
    w_phys = _to_phys_flat(a) / p.hall + p.hall * _to_phys_flat(j)
    cross_hat = _fft_flat(grid, kernels.cross3(np.ascontiguousarray(w_phys),
                                               _to_phys_flat(b)))
    db = -kernels.curl_mode(grid.kflat, np.ascontiguousarray(cross_hat))
    if include_diffusion:
        db += -p.nu * grid.k2flat[np.newaxis, :] * b.flat
    return {"b": SpectralVector(grid, db.reshape((3,) + grid.shape))}


def rhs_magneto_vorticity(omega_plus_b: SpectralVector, u: SpectralVector,
                          b: SpectralVector, p: PhysParams) -> SpectralVector:
    """Transport-stretching-diffusion law of the combined field.

    d/dt W = nu lap W - (u.grad)W + (W.grad)u + (eta - nu) lap B

    evaluated with frozen (u, b).  Used for the cancellation check only,
    never for time stepping.
    """
    grid = omega_plus_b.grid
    if u.grid != grid or b.grid != grid:
        raise ValueError("grid mismatch between fields")
    dirs = list(range(grid.dim))
    wflat = np.ascontiguousarray(omega_plus_b.flat)
    u_phys = _to_phys_flat(u)
    w_phys = _to_phys_flat(omega_plus_b)
    grad_w = _vector_grad_phys(grid, wflat, dirs)
    grad_u = _vector_grad_phys(grid, np.ascontiguousarray(u.flat), dirs)

    out = -_advect_flat(grid, u_phys[dirs], grad_w, "convective")
    out += _advect_flat(grid, w_phys[dirs], grad_u, "convective")
    out += -p.nu * grid.k2flat[np.newaxis, :] * wflat
    if p.eta != p.nu:
        out += -(p.eta - p.nu) * grid.k2flat[np.newaxis, :] * b.flat
    return SpectralVector(grid, out.reshape((3,) + grid.shape))


_RHS_DISPATCH = {
    "hall3d": rhs_hall_mhd_3d,
    "hall25d": rhs_hall_mhd_25d,
    "emhd_vector": rhs_emhd_vector,
    "emhd_stream": rhs_emhd_stream,
    "hmhd_stream": rhs_hmhd_stream,
    "decoupled_b": rhs_decoupled_b,
}


def evaluate_rhs(state: MhdState, p: PhysParams, include_diffusion: bool = True,
                 transport_form: str = "rotational",
                 validate: bool = True) -> dict:
    """Dispatch to the model's tendency (fields absent from the result,
    like the frozen velocity pair of the stream-form Hall model, do not
    evolve)."""
    fn = _RHS_DISPATCH.get(state.model)
    if fn is None:
        raise ValueError(f"no tendency defined for model {state.model!r}")
    if fn in (rhs_hall_mhd_3d, rhs_hall_mhd_25d):
        return fn(state, p, include_diffusion=include_diffusion,
                  transport_form=transport_form, validate=validate)
    if fn in (rhs_emhd_vector, rhs_decoupled_b):
        return fn(state, p, include_diffusion=include_diffusion,
                  validate=validate)
    return fn(state, p, include_diffusion=include_diffusion)
