#!/usr/bin/env python3
"""Generate FCIDUMP files for the 6-31G / STO-3G test systems.

Self-contained McMurchie-Davidson integral engine over contracted s/p
Cartesian Gaussians, plus a restricted HF solver. Integrals are dumped in
the converged RHF molecular-orbital basis (orthonormal by construction),
chemists' notation, 8-fold unique entries, 1-based indices.

Basis data are the standard published 6-31G and STO-3G tables. The engine
is checked against literature energies by `--selfcheck`:
  H/6-31G one-electron ground state  -0.498233
  H2/STO-3G R=1.4 RHF                -1.116714
  Be/6-31G RHF                      -14.566764

Usage:
  python3 tools/make_fcidump.py --out data [--only be_631g] [--selfcheck]
"""
import argparse
import json
import os
import sys

import numpy as np
from scipy.special import hyp1f1

BASIS = {
    "sto-3g": {
        "H": [("S", [(3.42525091, 0.15432897),
                     (0.62391373, 0.53532814),
                     (0.16885540, 0.44463454)])],
    },
    "6-31g": {
        "H": [("S", [(18.7311370, 0.03349460),
                     (2.8253937, 0.23472695),
                     (0.6401217, 0.81375733)]),
              ("S", [(0.1612778, 1.0)])],
        "Li": [("S", [(642.4189200, 0.0021426078),
                      (96.7985150, 0.0162088890),
                      (22.0911210, 0.0773155700),
                      (6.2010703, 0.2457860600),
                      (1.9351177, 0.4701890000),
                      (0.6367358, 0.3454708000)]),
               ("SP", [(2.3249184, -0.0350917400, 0.0089415080),
                       (0.6324306, -0.1912328000, 0.1410095000),
                       (0.0790534, 1.0839878000, 0.9453637000)]),
               ("SP", [(0.0359620, 1.0, 1.0)])],
        "Be": [("S", [(1264.5857000, 0.0019448),
                      (189.9368100, 0.0148351),
                      (43.1590890, 0.0720906),
                      (12.0986630, 0.2371542),
                      (3.8063232, 0.4691987),
                      (1.2728903, 0.3565202)]),
               ("SP", [(3.1964631, -0.1126487, 0.0559802),
                       (0.7478133, -0.2295064, 0.2615506),
                       (0.2199663, 1.1869167, 0.7939723)]),
               ("SP", [(0.0823099, 1.0, 1.0)])],
        "C": [("S", [(3047.5249000, 0.0018347),
                     (457.3695100, 0.0140373),
                     (103.9486900, 0.0688426),
                     (29.2101550, 0.2321844),
                     (9.2866630, 0.4679413),
                     (3.1639270, 0.3623120)]),
              ("SP", [(7.8682724, -0.1193324, 0.0689991),
                      (1.8812885, -0.1608542, 0.3164240),
                      (0.5442493, 1.1434564, 0.7443083)]),
              ("SP", [(0.1687144, 1.0, 1.0)])],
    },
}

CHARGE = {"H": 1.0, "Li": 3.0, "Be": 4.0, "C": 6.0}


def _df(n):
    r = 1.0
    while n > 1:
        r *= n
        n -= 2
    return r


def prim_norm(alpha, lmn):
    i, j, k = lmn
    return ((2 * alpha / np.pi) ** 0.75 * (4 * alpha) ** ((i + j + k) / 2.0)
            / np.sqrt(_df(2 * i - 1) * _df(2 * j - 1) * _df(2 * k - 1)))


class CGF:
    def __init__(self, center, lmn, prims):
        self.A = np.asarray(center, float)
        self.lmn = lmn
        self.alphas = np.array([a for a, c in prims])
        self.coefs = np.array([c * prim_norm(a, lmn) for a, c in prims])
        self.coefs /= np.sqrt(overlap(self, self))


def build_basis(atoms, basis_name):
    out = []
    for sym, xyz in atoms:
        for shell_type, prims in BASIS[basis_name][sym]:
            out.append(CGF(xyz, (0, 0, 0), [(p[0], p[1]) for p in prims]))
            if shell_type == "SP":
                for lmn in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
                    out.append(CGF(xyz, lmn, [(p[0], p[2]) for p in prims]))
    return out


def hermite_E(i, j, t, Qx, a, b):
    p, q = a + b, a * b / (a + b)
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return np.exp(-q * Qx * Qx)
    if j == 0:
        return (hermite_E(i - 1, j, t - 1, Qx, a, b) / (2 * p)
                - q * Qx / a * hermite_E(i - 1, j, t, Qx, a, b)
                + (t + 1) * hermite_E(i - 1, j, t + 1, Qx, a, b))
    return (hermite_E(i, j - 1, t - 1, Qx, a, b) / (2 * p)
            + q * Qx / b * hermite_E(i, j - 1, t, Qx, a, b)
            + (t + 1) * hermite_E(i, j - 1, t + 1, Qx, a, b))


def overlap_prim(a, lmn1, A, b, lmn2, B):
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    return ((np.pi / (a + b)) ** 1.5
            * hermite_E(l1, l2, 0, A[0] - B[0], a, b)
            * hermite_E(m1, m2, 0, A[1] - B[1], a, b)
            * hermite_E(n1, n2, 0, A[2] - B[2], a, b))


def kinetic_prim(a, lmn1, A, b, lmn2, B):
    l2, m2, n2 = lmn2
    term0 = b * (2 * (l2 + m2 + n2) + 3) * overlap_prim(a, lmn1, A, b, lmn2, B)
    term1 = -2 * b ** 2 * (overlap_prim(a, lmn1, A, b, (l2 + 2, m2, n2), B)
                           + overlap_prim(a, lmn1, A, b, (l2, m2 + 2, n2), B)
                           + overlap_prim(a, lmn1, A, b, (l2, m2, n2 + 2), B))
    term2 = -0.5 * (l2 * (l2 - 1) * overlap_prim(a, lmn1, A, b, (l2 - 2, m2, n2), B)
                    + m2 * (m2 - 1) * overlap_prim(a, lmn1, A, b, (l2, m2 - 2, n2), B)
                    + n2 * (n2 - 1) * overlap_prim(a, lmn1, A, b, (l2, m2, n2 - 2), B))
    return term0 + term1 + term2


def boys(n, T):
    return hyp1f1(n + 0.5, n + 1.5, -T) / (2.0 * n + 1.0)


def hermite_R(t, u, v, n, p, PC, RPC):
    if t < 0 or u < 0 or v < 0:
        return 0.0
    if t == u == v == 0:
        return (-2 * p) ** n * boys(n, p * RPC * RPC)
    if t > 0:
        return ((t - 1) * hermite_R(t - 2, u, v, n + 1, p, PC, RPC)
                + PC[0] * hermite_R(t - 1, u, v, n + 1, p, PC, RPC))
    if u > 0:
        return ((u - 1) * hermite_R(t, u - 2, v, n + 1, p, PC, RPC)
                + PC[1] * hermite_R(t, u - 1, v, n + 1, p, PC, RPC))
    return ((v - 1) * hermite_R(t, u, v - 2, n + 1, p, PC, RPC)
            + PC[2] * hermite_R(t, u, v - 1, n + 1, p, PC, RPC))


def nuclear_prim(a, lmn1, A, b, lmn2, B, C):
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    p = a + b
    P = (a * A + b * B) / p
    PC = P - C
    RPC = np.linalg.norm(PC)
    val = 0.0
    for t in range(l1 + l2 + 1):
        Et = hermite_E(l1, l2, t, A[0] - B[0], a, b)
        for u in range(m1 + m2 + 1):
            Eu = hermite_E(m1, m2, u, A[1] - B[1], a, b)
            for v in range(n1 + n2 + 1):
                Ev = hermite_E(n1, n2, v, A[2] - B[2], a, b)
                if Et * Eu * Ev != 0.0:
                    val += Et * Eu * Ev * hermite_R(t, u, v, 0, p, PC, RPC)
    return 2 * np.pi / p * val


def eri_prim(a, lmn1, A, b, lmn2, B, c, lmn3, C, d, lmn4, D):
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    l3, m3, n3 = lmn3
    l4, m4, n4 = lmn4
    p, q = a + b, c + d
    alpha = p * q / (p + q)
    P = (a * A + b * B) / p
    Q = (c * C + d * D) / q
    PQ = P - Q
    RPQ = np.linalg.norm(PQ)
    val = 0.0
    for t in range(l1 + l2 + 1):
        E1 = hermite_E(l1, l2, t, A[0] - B[0], a, b)
        if E1 == 0.0:
            continue
        for u in range(m1 + m2 + 1):
            E2 = hermite_E(m1, m2, u, A[1] - B[1], a, b)
            if E2 == 0.0:
                continue
            for v in range(n1 + n2 + 1):
                E3 = hermite_E(n1, n2, v, A[2] - B[2], a, b)
                if E3 == 0.0:
                    continue
                for tau in range(l3 + l4 + 1):
                    E4 = hermite_E(l3, l4, tau, C[0] - D[0], c, d)
                    if E4 == 0.0:
                        continue
                    for nu in range(m3 + m4 + 1):
                        E5 = hermite_E(m3, m4, nu, C[1] - D[1], c, d)
                        if E5 == 0.0:
                            continue
                        for phi in range(n3 + n4 + 1):
                            E6 = hermite_E(n3, n4, phi, C[2] - D[2], c, d)
                            if E6 == 0.0:
                                continue
                            val += (E1 * E2 * E3 * E4 * E5 * E6
                                    * (-1) ** (tau + nu + phi)
                                    * hermite_R(t + tau, u + nu, v + phi, 0,
                                                alpha, PQ, RPQ))
    return val * 2 * np.pi ** 2.5 / (p * q * np.sqrt(p + q))


def _contract2(f, g1, g2, *extra):
    val = 0.0
    for a, ca in zip(g1.alphas, g1.coefs):
        for b, cb in zip(g2.alphas, g2.coefs):
            val += ca * cb * f(a, g1.lmn, g1.A, b, g2.lmn, g2.A, *extra)
    return val


def overlap(g1, g2):
    return _contract2(overlap_prim, g1, g2)


def ao_integrals(atoms, basis_name):
    gs = build_basis(atoms, basis_name)
    n = len(gs)
    S = np.zeros((n, n))
    Hc = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1):
            S[i, j] = S[j, i] = overlap(gs[i], gs[j])
            hij = _contract2(kinetic_prim, gs[i], gs[j])
            for sym, xyz in atoms:
                hij -= CHARGE[sym] * _contract2(nuclear_prim, gs[i], gs[j],
                                                np.asarray(xyz, float))
            Hc[i, j] = Hc[j, i] = hij
    eri = np.zeros((n, n, n, n))
    for i in range(n):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(n):
                for l in range(k + 1):
                    if ij < k * (k + 1) // 2 + l:
                        continue
                    val = 0.0
                    for a, ca in zip(gs[i].alphas, gs[i].coefs):
                        for b, cb in zip(gs[j].alphas, gs[j].coefs):
                            for c, cc in zip(gs[k].alphas, gs[k].coefs):
                                for d, cd in zip(gs[l].alphas, gs[l].coefs):
                                    val += ca * cb * cc * cd * eri_prim(
                                        a, gs[i].lmn, gs[i].A, b, gs[j].lmn, gs[j].A,
                                        c, gs[k].lmn, gs[k].A, d, gs[l].lmn, gs[l].A)
                    for (p, q, r, s) in {(i, j, k, l), (j, i, k, l), (i, j, l, k),
                                         (j, i, l, k), (k, l, i, j), (l, k, i, j),
                                         (k, l, j, i), (l, k, j, i)}:
                        eri[p, q, r, s] = val
    e_nuc = 0.0
    for ia in range(len(atoms)):
        for ib in range(ia):
            ra = np.asarray(atoms[ia][1], float)
            rb = np.asarray(atoms[ib][1], float)
            e_nuc += (CHARGE[atoms[ia][0]] * CHARGE[atoms[ib][0]]
                      / np.linalg.norm(ra - rb))
    return S, Hc, eri, e_nuc


def rhf(S, H, eri, e_nuc, n_occ, max_iter=300, tol=1e-11):
    w, U = np.linalg.eigh(S)
    X = U @ np.diag(w ** -0.5) @ U.T
    F = H.copy()
    E = E_old = 0.0
    diis_F, diis_e = [], []
    for _ in range(max_iter):
        Fp = X @ F @ X
        _, Cp = np.linalg.eigh(Fp)
        C = X @ Cp
        P = 2.0 * C[:, :n_occ] @ C[:, :n_occ].T
        J = np.einsum("pqrs,rs->pq", eri, P)
        K = np.einsum("prqs,rs->pq", eri, P)
        F = H + J - 0.5 * K
        E = 0.5 * np.sum(P * (H + F)) + e_nuc
        err = X @ (F @ P @ S - S @ P @ F) @ X
        diis_F.append(F.copy())
        diis_e.append(err.ravel())
        if len(diis_F) > 8:
            diis_F.pop(0)
            diis_e.pop(0)
        if len(diis_F) > 1:
            m = len(diis_F)
            B = -np.ones((m + 1, m + 1))
            B[m, m] = 0.0
            for i in range(m):
                for j in range(m):
                    B[i, j] = diis_e[i] @ diis_e[j]
            rhs = np.zeros(m + 1)
            rhs[m] = -1.0
            try:
                cs = np.linalg.solve(B, rhs)[:m]
                F = sum(c * Fm for c, Fm in zip(cs, diis_F))
            except np.linalg.LinAlgError:
                pass
        if abs(E - E_old) < tol and np.abs(err).max() < 1e-9:
            break
        E_old = E
    Fp = X @ F @ X
    _, Cp = np.linalg.eigh(Fp)
    return E, X @ Cp


def write_fcidump(path, h, eri, e_core, nelec, ms2=0, thresh=1e-16):
    n = h.shape[0]
    with open(path, "w") as f:
        f.write(f"&FCI NORB={n},NELEC={nelec},MS2={ms2},\n")
        f.write("  ORBSYM=" + "1," * n + "\n")
        f.write("  ISYM=1,\n")
        f.write("&END\n")
        for i in range(n):
            for j in range(i + 1):
                ij = i * (i + 1) // 2 + j
                for k in range(i + 1):
                    for l in range(k + 1):
                        if ij < k * (k + 1) // 2 + l:
                            continue
                        v = eri[i, j, k, l]
                        if abs(v) > thresh:
                            f.write(f"{v:.16e} {i+1} {j+1} {k+1} {l+1}\n")
        for i in range(n):
            for j in range(i + 1):
                if abs(h[i, j]) > thresh:
                    f.write(f"{h[i,j]:.16e} {i+1} {j+1} 0 0\n")
        f.write(f"{e_core:.16e} 0 0 0 0\n")


def make_system(name, atoms, basis, nelec, outdir):
    S, Hc, eri_ao, e_nuc = ao_integrals(atoms, basis)
    E_rhf, C = rhf(S, Hc, eri_ao, e_nuc, nelec // 2)
    h = C.T @ Hc @ C
    eri = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri_ao, C, C, C, C, optimize=True)
    path = os.path.join(outdir, name + ".fcidump")
    write_fcidump(path, h, eri, e_nuc, nelec)
    meta = dict(system=name, basis=basis, atoms=[[s, list(x)] for s, x in atoms],
                units="bohr", nelec=nelec, norb=h.shape[0],
                e_nuclear=e_nuc, e_rhf_generator=E_rhf)
    with open(os.path.join(outdir, name + ".json"), "w") as f:
        json.dump(meta, f, indent=1)
    print(f"{name}: L={h.shape[0]} E_RHF(generator)={E_rhf:.8f} -> {path}")


def h4_geom(r1, r2):
    return [("H", (-r1 / 2, -r2 / 2, 0.0)), ("H", (r1 / 2, -r2 / 2, 0.0)),
            ("H", (-r1 / 2, r2 / 2, 0.0)), ("H", (r1 / 2, r2 / 2, 0.0))]


LIH_GRID = [2.00, 2.50, 2.75, 3.00, 3.50, 3.80, 3.90, 4.00, 4.10, 4.20,
            4.30, 4.40, 4.50, 4.75, 5.00, 5.50, 6.00]


def systems():
    out = {}
    for r in [1.40, 2.80, 6.00]:
        out[f"h2_sto3g_r{r:.2f}"] = (
            [("H", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))], "sto-3g", 2)
    out["be_631g"] = ([("Be", (0.0, 0.0, 0.0))], "6-31g", 4)
    for r in LIH_GRID:
        out[f"lih_631g_r{r:.2f}"] = (
            [("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, r))], "6-31g", 4)
    out["h4_631g_rect"] = (h4_geom(1.40, 3.50), "6-31g", 4)
    out["h4_631g_square"] = (h4_geom(2.45, 2.45), "6-31g", 4)
    out["c_631g"] = ([("C", (0.0, 0.0, 0.0))], "6-31g", 6)
    for r in [4.00, 5.75]:
        out[f"be2_631g_r{r:.2f}"] = (
            [("Be", (0.0, 0.0, 0.0)), ("Be", (0.0, 0.0, r))], "6-31g", 8)
    return out


def selfcheck():
    S, Hc, _, _ = ao_integrals([("H", (0.0, 0.0, 0.0))], "6-31g")
    w, U = np.linalg.eigh(S)
    X = U @ np.diag(w ** -0.5) @ U.T
    w = np.linalg.eigvalsh(X @ Hc @ X)
    assert abs(w[0] - (-0.498233)) < 1e-5, w[0]
    S, Hc, eri, en = ao_integrals([("H", (0, 0, 0)), ("H", (0, 0, 1.4))], "sto-3g")
    E, _ = rhf(S, Hc, eri, en, 1)
    assert abs(E - (-1.116714)) < 1e-5, E
    S, Hc, eri, en = ao_integrals([("Be", (0.0, 0.0, 0.0))], "6-31g")
    E, _ = rhf(S, Hc, eri, en, 2)
    assert abs(E - (-14.566764)) < 1e-5, E
    print("selfcheck OK")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    ap.add_argument("--only", nargs="*", default=None)
    ap.add_argument("--selfcheck", action="store_true")
    args = ap.parse_args()
    if args.selfcheck:
        selfcheck()
        return
    os.makedirs(args.out, exist_ok=True)
    for name, (atoms, basis, nelec) in systems().items():
        if args.only and name not in args.only:
            continue
        make_system(name, atoms, basis, nelec, args.out)


if __name__ == "__main__":
    main()
