"""Pure-Python run loop, used when the compiled ``_kernel`` is unavailable.

Arithmetic order matches ``_kernel.pyx`` exactly so both backends produce the
same bits for the same inputs.
"""

import math

TD0, PERTURBED, ETD, TDC = 0, 1, 2, 3
FOLLOW_ON_LIMIT = 1e100


def _draw(cum, u):
    last = len(cum) - 1
    for i in range(last):
        if u < cum[i]:
            return i
    return last


def _rmse(phi, theta, v_exact, d_mu):
    acc = 0.0
    for s in range(len(phi)):
        row = phi[s]
        v = 0.0
        for k in range(len(theta)):
            v = v + row[k] * theta[k]
        e = v_exact[s] - v
        acc = acc + d_mu[s] * e * e
    return math.sqrt(acc)


def weighted_error(phi, theta, v_exact, d_mu):
    return _rmse(phi.tolist(), list(theta), v_exact.tolist(), d_mu.tolist())


def run_block(algo, phi, rho_tab, cum_mu, cum_p, rewards, gamma, eta, alpha0, decay,
              beta0, v_exact, d_mu, theta, w, trace, uniforms, state, n0, stride,
              iterations, threshold, out):
    phi_l = phi.tolist()
    rho_l = rho_tab.tolist()
    cum_mu_l = cum_mu.tolist()
    cum_p_l = cum_p.tolist()
    rew_l = rewards.tolist()
    vex = v_exact.tolist()
    dmu = d_mu.tolist()
    th = theta.tolist()
    wv = w.tolist()
    f_prev, rho_prev = float(trace[0]), float(trace[1])
    d = len(th)
    dr = range(d)
    s = int(state)
    diverged_at = -1

    for i, (ua, un) in enumerate(uniforms.tolist()):
        n = n0 + i
        a = _draw(cum_mu_l[s], ua)
        s2 = _draw(cum_p_l[s][a], un)
        r = rew_l[s][a]
        rho = rho_l[s][a]
        if decay == 0.0:
            alpha = alpha0
            beta = beta0
        else:
            alpha = alpha0 / math.pow(float(n + 1), decay)
            beta = beta0 / math.pow(float(n + 1), decay)

        x = phi_l[s]
        x2 = phi_l[s2]
        vs = 0.0
        vn = 0.0
        for k in dr:
            vs = vs + x[k] * th[k]
            vn = vn + x2[k] * th[k]

        bad = False
        if algo == TD0 or algo == PERTURBED:
            delta = r + gamma * vn - (1.0 + eta) * vs
            c = alpha * rho * delta
            for k in dr:
                th[k] = th[k] + c * x[k]
        elif algo == ETD:
            follow_on = 1.0 + gamma * rho_prev * f_prev
            delta = r + gamma * vn - vs
            c = alpha * follow_on * rho * delta
            for k in dr:
                th[k] = th[k] + c * x[k]
            f_prev, rho_prev = follow_on, rho
            if not follow_on <= FOLLOW_ON_LIMIT:
                bad = True
        else:
            delta = r + gamma * vn - vs
            corr = 0.0
            for k in dr:
                corr = corr + x[k] * wv[k]
            c = alpha * rho
            c2 = beta * rho * (delta - corr)
            for k in dr:
                th[k] = th[k] + c * (delta * x[k] - (gamma * corr) * x2[k])
            for k in dr:
                wv[k] = wv[k] + c2 * x[k]

        s = s2
        n = n + 1
        big = 0.0
        for k in dr:
            t = th[k]
            if not math.isfinite(t):
                big = threshold + 1.0
                bad = True
            elif abs(t) > big:
                big = abs(t)
        if big > threshold:
            bad = True

        if bad or n % stride == 0 or n == iterations:
            e = _rmse(phi_l, th, vex, dmu)
            out[(n + stride - 1) // stride] = e
            if bad or not e <= threshold:
                diverged_at = n
                break

    theta[:] = th
    w[:] = wv
    trace[0], trace[1] = f_prev, rho_prev
    return s, diverged_at
