"""Regenerates the FCIDUMP fixtures in this directory (requires pyscf)."""

import numpy as np
from pyscf import ao2mo, gto, mcscf, scf
from pyscf.tools import fcidump

TOL = 1e-14


def h2():
    mol = gto.M(atom="H 0 0 0; H 0 0 0.735", basis="sto-6g", symmetry="D2h", verbose=0)
    fcidump.from_scf(scf.RHF(mol).run(), "h2_sto6g.fcidump", tol=TOL)


def heh_plus():
    mol = gto.M(atom="He 0 0 0; H 0 0 0.772", basis="sto-6g", charge=1, verbose=0)
    fcidump.from_scf(scf.RHF(mol).run(), "heh_plus_sto6g.fcidump", tol=TOL)


def h4_square():
    # the default guess lands on a higher RHF solution with the degenerate
    # pair along the edges; restart from the pair rotated onto the diagonals
    mol = gto.M(atom="H 0 0 0; H 1 0 0; H 1 1 0; H 0 1 0", basis="sto-6g", verbose=0)
    mf0 = scf.RHF(mol).run()
    c = mf0.mo_coeff.copy()
    u, v = c[:, 1].copy(), c[:, 2].copy()
    c[:, 1] = (u + v) / np.sqrt(2)
    c[:, 2] = (u - v) / np.sqrt(2)
    mf = scf.RHF(mol)
    mf.verbose = 0
    mf.kernel(dm0=mf0.make_rdm1(c, mf0.mo_occ))
    fcidump.from_mo(mol, "h4_square_sto6g.fcidump", mf.mo_coeff, tol=TOL)


def beh2_frozen_core():
    mol = gto.M(atom="Be 0 0 0; H 0 0 1.334; H 0 0 -1.334", basis="sto-6g", symmetry="D2h", verbose=0)
    cas = mcscf.CASCI(scf.RHF(mol).run(), 6, 4)
    h1, ecore = cas.get_h1eff()
    eri = ao2mo.restore(1, cas.get_h2eff(), 6)
    fcidump.from_integrals("beh2_fc_sto6g.fcidump", h1, eri, 6, 4, ecore, ms=0, tol=TOL)


def hubbard_chain(t=0.5, u=0.5, n=4):
    h = np.zeros((n, n))
    for i in range(n - 1):
        h[i, i + 1] = h[i + 1, i] = -t
    _, c = np.linalg.eigh(h)
    eri = np.zeros((n,) * 4)
    for i in range(n):
        eri[i, i, i, i] = u
    h1 = c.T @ h @ c
    eri = np.einsum("pqrs,pi,qj,rk,sl->ijkl", eri, c, c, c, c)
    fcidump.from_integrals("hubbard4_chain.fcidump", h1, eri, n, n, 0.0, ms=0, tol=TOL)


if __name__ == "__main__":
    h2()
    heh_plus()
    h4_square()
    beh2_frozen_core()
    hubbard_chain()
