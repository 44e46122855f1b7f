"""Bilinear structure of the reformulated Hall-MHD system.

Three primitives act on divergence-free vector fields,

    Q(u, v) = div(u (x) v)   with (u (x) v)_ij = u_j v_i,
    P(u, v) = u x v,
    R(u, v) = curl(u x v),

so Q(u, v) = u . grad v whenever div u = 0.  Out of these the module builds
the combined forcing Theta, the two-row kernel Gamma, and the projected
nonlinearity Omega that drives the mild-solution solvers:

    Omega(K, L) = Leray( Gamma_1,
                         (Id - Lap)^-1 curl Gamma_2,
                         -Lap (Id - Lap)^-1 Gamma_2 ).

The coefficient of the J-self-advection term inside Gamma_2 / Theta is kept
as a parameter: the source system's two printed forms disagree about it
(-1 versus the value +2 that the vector-identity derivation produces), and
`equivalence_check` measures the discrepancy instead of hiding it.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .spectral import (
    SCALAR,
    VECTOR3,
    FieldError,
    Grid3,
    SpectralField,
    StateTriple,
    _check_same,
    _dealias_half,
    _half_from_phys,
    _phys_from_half,
    curl,
    cross_product,
    div,
    dot_product,
    full_from_half,
    grad,
    l2_norm,
    leray_project,
)

# J.grad J coefficient in Theta / Gamma row 2: as printed in the source
# system, and as the identity chain from the (u, H) form actually yields.
JGRADJ_AS_PRINTED = -1.0
JGRADJ_DERIVED = 2.0


# ----------------------------------------------------------------------
# bilinear primitives
# ----------------------------------------------------------------------

def bilinear_primitive(kind: str, u: SpectralField, v: SpectralField) -> SpectralField:
    """Q, P or R applied to a pair of vector fields on the same grid."""
    _check_same(u, v)
    if u.rank != VECTOR3:
        raise FieldError("bilinear primitives act on vector3 fields")
    if kind == "Q":
        return _tensor_divergence(u, v)
    if kind == "P":
        return cross_product(u, v)
    if kind == "R":
        return curl(cross_product(u, v))
    raise FieldError(f"unknown bilinear kind {kind!r}")


def _tensor_divergence(u: SpectralField, v: SpectralField) -> SpectralField:
    """div(u (x) v): component i is sum_j d_j (u_j v_i)."""
    grid = u.grid
    n = grid.n
    pu = _phys_from_half(u.half, n)
    pv = _phys_from_half(v.half, n)
    # products u_j v_i, then one spectral divergence per component i
    prods = pu[None, :, :, :, :] * pv[:, None, :, :, :]  # (i, j, x, y, z)
    hat = _dealias_half(_half_from_phys(prods), grid)
    xi = grid.xi_half
    out_half = 1j * (xi[0] * hat[:, 0] + xi[1] * hat[:, 1] + xi[2] * hat[:, 2])
    return SpectralField(grid, VECTOR3, full_from_half(out_half, n))


def advect(u: SpectralField, v: SpectralField) -> SpectralField:
    """u . grad v for divergence-free u (alias for Q)."""
    return bilinear_primitive("Q", u, v)


# ----------------------------------------------------------------------
# Theta
# ----------------------------------------------------------------------

@dataclass
class ThetaResult:
    field: SpectralField
    warnings: list = dc_field(default_factory=list)


def build_theta(u: SpectralField, B: SpectralField, J: SpectralField,
                jgradj: float = JGRADJ_AS_PRINTED, div_tol: float = 1e-8) -> ThetaResult:
    """Theta = u x B - 2 B.grad B + jgradj * J.grad J - curl(J x u)
    - 2 J.grad u + grad(J . u).

    The gradient term is kept even though curl and the Leray-projected rows
    annihilate it; that cancellation is a checked property downstream.
    Non-divergence-free inputs are tolerated but recorded as warnings.
    """
    warnings = []
    for name, f in (("u", u), ("B", B), ("J", J)):
        scale = max(l2_norm(f), 1e-300)
        rel = l2_norm(div(f)) / scale
        if rel > div_tol:
            warnings.append(f"div {name} = {rel:.3e} exceeds {div_tol:.1e}")
    theta = (
        cross_product(u, B)
        - 2.0 * advect(B, B)
        + jgradj * advect(J, J)
        - curl(cross_product(J, u))
        - 2.0 * advect(J, u)
        + grad(dot_product(J, u))
    )
    return ThetaResult(theta, warnings)


# ----------------------------------------------------------------------
# Gamma and Omega
# ----------------------------------------------------------------------

@dataclass
class NonlinearOutput:
    gamma1: SpectralField
    gamma2: SpectralField
    omega: StateTriple


def build_gamma_omega(K: StateTriple, L: StateTriple,
                      jgradj: float = JGRADJ_AS_PRINTED) -> NonlinearOutput:
    """Assemble Gamma rows and the projected nonlinearity Omega(K, L).

    Gamma_1 = Q(K2,L2) - Q(K1,L1) - Q(K3,L3)
    Gamma_2 = P(K1,L2) - R(K3,L1) + jgradj Q(K3,L3) - 2 Q(K2,L2) - 2 Q(K3,L1)

    The printed system repeats row 2 as row 3; the two rows of Omega consume
    the shared Gamma_2 through different multipliers.
    """
    if not K.grid.compatible(L.grid):
        raise FieldError("state triples live on incompatible grids")
    K1, K2, K3 = K.fields()
    L1, L2, L3 = L.fields()
    Q = lambda a, b: bilinear_primitive("Q", a, b)
    q11, q22, q33 = Q(K1, L1), Q(K2, L2), Q(K3, L3)
    gamma1 = q22 - q11 - q33
    gamma2 = (
        bilinear_primitive("P", K1, L2)
        - bilinear_primitive("R", K3, L1)
        + jgradj * q33
        - 2.0 * q22
        - 2.0 * Q(K3, L1)
    )
    grid = K.grid
    inv_helm = 1.0 / (1.0 + grid.xi_sq)
    row2 = curl(SpectralField(grid, VECTOR3, gamma2.coeffs * inv_helm))
    row3 = SpectralField(grid, VECTOR3, gamma2.coeffs * (grid.xi_sq * inv_helm))
    omega = StateTriple(
        leray_project(gamma1),
        leray_project(row2),
        leray_project(row3),
    )
    return NonlinearOutput(gamma1, gamma2, omega)


def rhs_S(U: StateTriple, jgradj: float = JGRADJ_AS_PRINTED) -> StateTriple:
    """Right-hand side of the projected triple system: Omega(U, U)."""
    return build_gamma_omega(U, U, jgradj=jgradj).omega


# ----------------------------------------------------------------------
# stacked fast path (used by the solvers)
# ----------------------------------------------------------------------
# A state is a (9, nx, ny, nzh) half-spectrum stack: components 0-2 = u,
# 3-5 = B, 6-8 = J.  omega_half must agree with build_gamma_omega to
# round-off; the test suite pins that.

def stack_from_triple(state: StateTriple) -> np.ndarray:
    return np.concatenate([state.u.half, state.B.half, state.J.half], axis=0)


def triple_from_stack(stack: np.ndarray, grid: Grid3) -> StateTriple:
    full = full_from_half(stack, grid.n)
    mk = lambda c: SpectralField(grid, VECTOR3, c)
    return StateTriple(mk(full[0:3]), mk(full[3:6]), mk(full[6:9]))


def _leray_stack(stack: np.ndarray, grid: Grid3) -> np.ndarray:
    """Leray projection of each 3-vector slice of a (9, ...) stack."""
    xi = grid.xi_half
    xi_sq = grid.xi_sq_half.copy()
    xi_sq[0, 0, 0] = 1.0
    out = stack.copy()
    for base in (0, 3, 6):
        s = out[base : base + 3]
        dot = (xi[0] * s[0] + xi[1] * s[1] + xi[2] * s[2]) / xi_sq
        for i in range(3):
            s[i] -= xi[i] * dot
    return out


def omega_half(Ks: np.ndarray, Ls: np.ndarray, grid: Grid3,
               jgradj: float = JGRADJ_AS_PRINTED) -> np.ndarray:
    """Omega(K, L) on half-spectrum stacks; returns a (9, ...) stack."""
    n = grid.n
    xi = grid.xi_half
    pK = _phys_from_half(Ks, n)
    pL = pK if Ls is Ks else _phys_from_half(Ls, n)

    def tensor_div(a: int, b: int) -> np.ndarray:
        # Q(K_a, L_b), vector slots a, b in {0, 1, 2}
        ua = pK[3 * a : 3 * a + 3]
        vb = pL[3 * b : 3 * b + 3]
        prods = ua[None] * vb[:, None]  # (i, j, x, y, z)
        hat = _dealias_half(_half_from_phys(prods), grid)
        return 1j * (xi[0] * hat[:, 0] + xi[1] * hat[:, 1] + xi[2] * hat[:, 2])

    def cross_hat(a: int, b: int) -> np.ndarray:
        w = np.cross(pK[3 * a : 3 * a + 3], pL[3 * b : 3 * b + 3], axis=0)
        return _dealias_half(_half_from_phys(w), grid)

    q11 = tensor_div(0, 0)
    q22 = tensor_div(1, 1)
    q33 = tensor_div(2, 2)
    q31 = tensor_div(2, 0)
    p12 = cross_hat(0, 1)
    r31 = _curl_half(cross_hat(2, 0), xi)

    gamma1 = q22 - q11 - q33
    gamma2 = p12 - r31 + jgradj * q33 - 2.0 * q22 - 2.0 * q31

    inv_helm = 1.0 / (1.0 + grid.xi_sq_half)
    out = np.empty_like(Ks)
    out[0:3] = gamma1
    out[3:6] = _curl_half(gamma2 * inv_helm, xi)
    out[6:9] = gamma2 * (grid.xi_sq_half * inv_helm)
    return _leray_stack(out, grid)


def _curl_half(v: np.ndarray, xi) -> np.ndarray:
    out = np.empty_like(v)
    out[0] = 1j * (xi[1] * v[2] - xi[2] * v[1])
    out[1] = 1j * (xi[2] * v[0] - xi[0] * v[2])
    out[2] = 1j * (xi[0] * v[1] - xi[1] * v[0])
    return out


# ----------------------------------------------------------------------
# the (u, H) form of the system
# ----------------------------------------------------------------------

def rhs_HMHD(u: SpectralField, B: SpectralField):
    """Right-hand sides of the (u, H) formulation with H = (Id - Lap) B.

    Returns (rhs_u, rhs_H):
      rhs_u = (curl B) x H - Leray(u . grad u)
      rhs_H = curl(u x H) + curl((curl B) x (curl u)) - 2 curl((curl B) x H)
    """
    _check_same(u, B)
    grid = u.grid
    H = SpectralField(grid, VECTOR3, B.coeffs * (1.0 + grid.xi_sq))
    J = curl(B)
    rhs_u = cross_product(J, H) - leray_project(advect(u, u))
    rhs_H = (
        curl(cross_product(u, H))
        + curl(cross_product(J, curl(u)))
        - 2.0 * curl(cross_product(J, H))
    )
    return rhs_u, rhs_H


@dataclass
class EquivalenceReport:
    """Residuals between the (u, H) evolution and the triple system.

    residuals_printed uses the J.grad J coefficient as printed (-1);
    residuals_derived uses the identity-derived value (+2).  `findings`
    names any constant mismatch the comparison exposes.
    """

    residuals_printed: dict
    residuals_derived: dict
    findings: list

    @property
    def max_printed(self) -> float:
        return max(self.residuals_printed.values())

    @property
    def max_derived(self) -> float:
        return max(self.residuals_derived.values())


def _rel_residual(a: SpectralField, b: SpectralField) -> float:
    scale = max(l2_norm(a), l2_norm(b), 1e-300)
    return l2_norm(a - b) / scale


def equivalence_check(u: SpectralField, B: SpectralField, tol: float = 1e-10) -> EquivalenceReport:
    """Map the (u, H) right-hand side onto (u, B, J) and compare with Omega.

    The u rows agree identically.  The B and J rows agree only for the
    derived J.grad J coefficient; with the printed coefficient the gap is
    3 * (Id-Lap)^-1 curl(J.grad J), which is reported as a finding.
    """
    grid = u.grid
    U = StateTriple.from_uB(u, B)
    rhs_u, rhs_H = rhs_HMHD(u, B)
    inv_helm = 1.0 / (1.0 + grid.xi_sq)
    mapped_B = SpectralField(grid, VECTOR3, rhs_H.coeffs * inv_helm)
    mapped = StateTriple(leray_project(rhs_u), mapped_B, curl(mapped_B))

    results = {}
    for label, coeff in (("printed", JGRADJ_AS_PRINTED), ("derived", JGRADJ_DERIVED)):
        om = rhs_S(U, jgradj=coeff)
        results[label] = {
            "u": _rel_residual(mapped.u, om.u),
            "B": _rel_residual(mapped.B, om.B),
            "J": _rel_residual(mapped.J, om.J),
        }

    findings = []
    if max(results["printed"].values()) > tol and max(results["derived"].values()) <= tol:
        findings.append(
            "constant mismatch: J.grad J enters Theta/Gamma_2 with coefficient "
            f"{JGRADJ_AS_PRINTED:+g} as printed, but the (u, H) form requires "
            f"{JGRADJ_DERIVED:+g}; printed-form residual "
            f"{max(results['printed'].values()):.3e}, derived-form residual "
            f"{max(results['derived'].values()):.3e}"
        )
    return EquivalenceReport(results["printed"], results["derived"], findings)


# ----------------------------------------------------------------------
# vector identities
# ----------------------------------------------------------------------

def verify_vector_identities(U: SpectralField, V: SpectralField) -> dict:
    """Max relative residual of the four curl/advection identities.

    (vect1) curl(U x V) = V.grad U - U.grad V
    (vect2) (curl U) x U = U.grad U - grad(|U|^2)/2
    (vect3) V x curl U + U x curl V = -curl(U x V) - 2 U.grad V + grad(U.V)
    (vect4) curl curl U = -Lap U

    (vect1) and (vect3) need div U = div V = 0.
    """
    _check_same(U, V)
    grid = U.grid

    lhs1 = curl(cross_product(U, V))
    rhs1 = advect(V, U) - advect(U, V)

    lhs2 = cross_product(curl(U), U)
    rhs2 = advect(U, U) - 0.5 * grad(dot_product(U, U))

    lhs3 = cross_product(V, curl(U)) + cross_product(U, curl(V))
    rhs3 = -curl(cross_product(U, V)) - 2.0 * advect(U, V) + grad(dot_product(U, V))

    lhs4 = curl(curl(U))
    rhs4 = SpectralField(grid, VECTOR3, U.coeffs * grid.xi_sq)

    return {
        "vect1": _rel_residual(lhs1, rhs1),
        "vect2": _rel_residual(lhs2, rhs2),
        "vect3": _rel_residual(lhs3, rhs3),
        "vect4": _rel_residual(lhs4, rhs4),
    }
