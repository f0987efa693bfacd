# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled run loop.  Mirrors ``_kernel_py`` operation for operation."""

from libc.math cimport pow, sqrt, fabs, isfinite

cdef enum:
    TD0 = 0
    PERTURBED = 1
    ETD = 2
    TDC = 3

cdef double FOLLOW_ON_LIMIT = 1e100


cdef inline Py_ssize_t _draw(const double[:] cum, double u) noexcept nogil:
    cdef Py_ssize_t i, last = cum.shape[0] - 1
    for i in range(last):
        if u < cum[i]:
            return i
    return last


cdef double _rmse(const double[:, :] phi, const double[:] theta,
                  const double[:] v_exact, const double[:] d_mu) noexcept nogil:
    cdef Py_ssize_t s, k
    cdef double v, e, acc = 0.0
    for s in range(phi.shape[0]):
        v = 0.0
        for k in range(phi.shape[1]):
            v = v + phi[s, k] * theta[k]
        e = v_exact[s] - v
        acc = acc + d_mu[s] * e * e
    return sqrt(acc)


def weighted_error(const double[:, :] phi, const double[:] theta,
                   const double[:] v_exact, const double[:] d_mu):
    return _rmse(phi, theta, v_exact, d_mu)


def run_block(int algo, const double[:, :] phi, const double[:, :] rho_tab,
              const double[:, :] cum_mu, const double[:, :, :] cum_p,
              const double[:, :] rewards, double gamma, double eta,
              double alpha0, double decay, double beta0,
              const double[:] v_exact, const double[:] d_mu,
              double[:] theta, double[:] w, double[:] trace,
              const double[:, :] uniforms, Py_ssize_t state, Py_ssize_t n0,
              Py_ssize_t stride, Py_ssize_t iterations, double threshold,
              double[:] out):
    """Advance one trajectory over ``uniforms.shape[0]`` transitions.

    ``trace`` holds ETD's ``(F_{n-1}, rho_{n-1})`` and is updated in place, as are
    ``theta`` and ``w``.  Returns ``(state, diverged_at)`` where ``diverged_at`` is
    the update count at which divergence was detected, or -1.
    """
    cdef Py_ssize_t d = phi.shape[1]
    cdef Py_ssize_t m = uniforms.shape[0]
    cdef Py_ssize_t i, k, a, s2, n
    cdef Py_ssize_t s = state
    cdef double alpha, beta, rho, r, vs, vn, delta, c, c2, corr, follow_on, e, big
    cdef bint bad
    cdef Py_ssize_t diverged_at = -1

    with nogil:
        for i in range(m):
            n = n0 + i
            a = _draw(cum_mu[s], uniforms[i, 0])
            s2 = _draw(cum_p[s, a], uniforms[i, 1])
            r = rewards[s, a]
            rho = rho_tab[s, a]
            if decay == 0.0:
                alpha = alpha0
                beta = beta0
            else:
                alpha = alpha0 / pow(<double>(n + 1), decay)
                beta = beta0 / pow(<double>(n + 1), decay)

            vs = 0.0
            vn = 0.0
            for k in range(d):
                vs = vs + phi[s, k] * theta[k]
                vn = vn + phi[s2, k] * theta[k]

            bad = False
            if algo == TD0 or algo == PERTURBED:
                delta = r + gamma * vn - (1.0 + eta) * vs
                c = alpha * rho * delta
                for k in range(d):
                    theta[k] = theta[k] + c * phi[s, k]
            elif algo == ETD:
                follow_on = 1.0 + gamma * trace[1] * trace[0]
                delta = r + gamma * vn - vs
                c = alpha * follow_on * rho * delta
                for k in range(d):
                    theta[k] = theta[k] + c * phi[s, k]
                trace[0] = follow_on
                trace[1] = rho
                if not follow_on <= FOLLOW_ON_LIMIT:
                    bad = True
            else:
                delta = r + gamma * vn - vs
                corr = 0.0
                for k in range(d):
                    corr = corr + phi[s, k] * w[k]
                c = alpha * rho
                c2 = beta * rho * (delta - corr)
                for k in range(d):
                    theta[k] = theta[k] + c * (delta * phi[s, k] - (gamma * corr) * phi[s2, k])
                for k in range(d):
                    w[k] = w[k] + c2 * phi[s, k]

            s = s2
            n = n + 1
            big = 0.0
            for k in range(d):
                if not isfinite(theta[k]):
                    big = threshold + 1.0
                    bad = True
                elif fabs(theta[k]) > big:
                    big = fabs(theta[k])
            if big > threshold:
                bad = True

            if bad or n % stride == 0 or n == iterations:
                e = _rmse(phi, theta, v_exact, d_mu)
                out[(n + stride - 1) // stride] = e
                if bad or not e <= threshold:
                    diverged_at = n
                    break

    return s, diverged_at
