"""Independent finite-difference oracles.

Everything here works on plain Python callables (point -> ndarray) and uses
central differences only.  Nothing imports the package under test, so these
routines provide an independent ground truth for curvature, Lie derivatives
and quotient (transversal) geometry.
"""

import numpy as np

H = 1e-5


def _partial(f, point, mu, h=H):
    p1 = np.array(point, dtype=float)
    p2 = np.array(point, dtype=float)
    p1[mu] += h
    p2[mu] -= h
    return (np.asarray(f(p1)) - np.asarray(f(p2))) / (2.0 * h)


def christoffel(metric_fn, point, h=H):
    """Coordinate Christoffel symbols Gamma^rho_{mu nu} by central differences."""
    point = np.asarray(point, dtype=float)
    n = len(point)
    g = np.asarray(metric_fn(point), dtype=float)
    ginv = np.linalg.inv(g)
    dg = np.array([_partial(metric_fn, point, mu, h) for mu in range(n)])
    gamma = np.zeros((n, n, n))
    for rho in range(n):
        for mu in range(n):
            for nu in range(n):
                s = 0.0
                for sig in range(n):
                    s += ginv[rho, sig] * (dg[mu][sig, nu] + dg[nu][sig, mu] - dg[sig][mu, nu])
                gamma[rho, mu, nu] = 0.5 * s
    return gamma


def riemann_down(metric_fn, point, h=1e-4):
    """R_{rho sigma mu nu} with R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].

    Convention: R^rho_{sigma mu nu} = d_mu Gamma^rho_{nu sigma}
    - d_nu Gamma^rho_{mu sigma} + Gamma^rho_{mu lam} Gamma^lam_{nu sigma}
    - Gamma^rho_{nu lam} Gamma^lam_{mu sigma}; first index lowered with g.
    """
    point = np.asarray(point, dtype=float)
    n = len(point)
    g = np.asarray(metric_fn(point), dtype=float)
    gamma = christoffel(metric_fn, point, h)
    dgamma = np.array([_partial(lambda p: christoffel(metric_fn, p, h), point, mu, h)
                       for mu in range(n)])
    r_up = np.zeros((n, n, n, n))
    for rho in range(n):
        for sig in range(n):
            for mu in range(n):
                for nu in range(n):
                    val = dgamma[mu][rho, nu, sig] - dgamma[nu][rho, mu, sig]
                    for lam in range(n):
                        val += gamma[rho, mu, lam] * gamma[lam, nu, sig]
                        val -= gamma[rho, nu, lam] * gamma[lam, mu, sig]
                    r_up[rho, sig, mu, nu] = val
    return np.einsum("ra,asmn->rsmn", g, r_up)


def frame_riemann(metric_fn, frame_fn, point, h=1e-4):
    """Frame components R_{ijkl} = R(e_k, e_l; e_j, e_i)-style contraction.

    frame_fn(point) returns rows e_alpha^mu of the orthonormal frame.
    """
    e = np.asarray(frame_fn(np.asarray(point, dtype=float)), dtype=float)
    rd = riemann_down(metric_fn, point, h)
    return np.einsum("abcd,ia,jb,kc,ld->ijkl", rd, e, e, e, e)


def frame_connection(metric_fn, frame_fn, point, h=H):
    """omega^i_j(e_k) = <e_i, nabla_{e_k} e_j> (orthonormal frame, eta = id)."""
    point = np.asarray(point, dtype=float)
    n = len(point)
    g = np.asarray(metric_fn(point), dtype=float)
    gamma = christoffel(metric_fn, point, h)
    e = np.asarray(frame_fn(point), dtype=float)
    de = np.array([_partial(frame_fn, point, mu, h) for mu in range(n)])
    w = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                # nabla_{e_k} e_j = e_k^mu (d_mu e_j^rho + Gamma^rho_{mu nu} e_j^nu)
                nab = np.zeros(n)
                for mu in range(n):
                    nab += e[k, mu] * (de[mu][j] + gamma[:, mu, :] @ e[j])
                w[i, j, k] = e[i] @ g @ nab
    return w


def lie_derivative_metric(metric_fn, vector_fn, point, h=H):
    """(L_V g)_{mu nu} = V^rho d_rho g_{mu nu} + g_{rho nu} d_mu V^rho + g_{mu rho} d_nu V^rho."""
    point = np.asarray(point, dtype=float)
    n = len(point)
    g = np.asarray(metric_fn(point), dtype=float)
    v = np.asarray(vector_fn(point), dtype=float)
    dg = np.array([_partial(metric_fn, point, mu, h) for mu in range(n)])
    dv = np.array([_partial(vector_fn, point, mu, h) for mu in range(n)])
    lie = np.einsum("r,rmn->mn", v, dg)
    for mu in range(n):
        for nu in range(n):
            lie[mu, nu] += g[:, nu] @ dv[mu] + g[mu, :] @ dv[nu]
    return lie


def d_of_one_form(form_fn, point, h=H):
    """(d a)_{mu nu} = d_mu a_nu - d_nu a_mu for a numeric 1-form field."""
    point = np.asarray(point, dtype=float)
    n = len(point)
    da = np.array([_partial(form_fn, point, mu, h) for mu in range(n)])
    out = np.zeros((n, n))
    for mu in range(n):
        for nu in range(n):
            out[mu, nu] = da[mu][nu] - da[nu][mu]
    return out


def directional_derivative(scalar_fn, vector, point, h=H):
    point = np.asarray(point, dtype=float)
    v = np.asarray(vector, dtype=float)
    return (scalar_fn(point + h * v) - scalar_fn(point - h * v)) / (2.0 * h)


def gauss_curvature_2d(metric2_fn, point2, h=2e-3):
    """Gauss curvature of a 2d metric via the Brioschi formula, all by FD.

    metric2_fn(u, v) -> 2x2 first fundamental form [[E, F], [F, G]].
    """
    def comp(idx):
        def f(p):
            m = np.asarray(metric2_fn(p[0], p[1]), dtype=float)
            return m[idx]
        return f

    u, v = float(point2[0]), float(point2[1])
    p = np.array([u, v])
    E, F, G = comp((0, 0)), comp((0, 1)), comp((1, 1))

    def d1(f, mu):
        q1, q2 = p.copy(), p.copy()
        q1[mu] += h
        q2[mu] -= h
        return (f(q1) - f(q2)) / (2 * h)

    def d2(f, mu, nu):
        if mu == nu:
            q1, q2 = p.copy(), p.copy()
            q1[mu] += h
            q2[mu] -= h
            return (f(q1) - 2 * f(p) + f(q2)) / (h * h)
        qpp, qpm, qmp, qmm = p.copy(), p.copy(), p.copy(), p.copy()
        qpp[mu] += h; qpp[nu] += h
        qpm[mu] += h; qpm[nu] -= h
        qmp[mu] -= h; qmp[nu] += h
        qmm[mu] -= h; qmm[nu] -= h
        return (f(qpp) - f(qpm) - f(qmp) + f(qmm)) / (4 * h * h)

    Ev, Eu = d1(E, 1), d1(E, 0)
    Gv, Gu = d1(G, 1), d1(G, 0)
    Fu, Fv = d1(F, 0), d1(F, 1)
    Evv, Guu, Fuv = d2(E, 1, 1), d2(G, 0, 0), d2(F, 0, 1)
    e0, f0, g0 = E(p), F(p), G(p)

    m1 = np.array([
        [-0.5 * Evv + Fuv - 0.5 * Guu, 0.5 * Eu, Fu - 0.5 * Ev],
        [Fv - 0.5 * Gu, e0, f0],
        [0.5 * Gv, f0, g0],
    ])
    m2 = np.array([
        [0.0, 0.5 * Ev, 0.5 * Gu],
        [0.5 * Ev, e0, f0],
        [0.5 * Gu, f0, g0],
    ])
    det = e0 * g0 - f0 * f0
    return (np.linalg.det(m1) - np.linalg.det(m2)) / (det * det)
