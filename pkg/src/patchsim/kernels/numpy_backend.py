"""Pure-numpy Yee update kernels, semantically identical to the numba path.

The psi arrays are updated over the full grid; outside the absorbing layers
b == 1 and c == 0, so psi stays exactly zero there and the result matches
the gated numba kernels.
"""

import numpy as np


def _ax(v):
    return v[:, None, None]


def _ay(v):
    return v[None, :, None]


def _az(v):
    return v[None, None, :]


def update_h(Ex, Ey, Ez, Hx, Hy, Hz,
             phxy, phxz, phyx, phyz, phzx, phzy,
             bhx, chx, bhy, chy, bhz, chz,
             ikhx, ikhy, ikhz,
             inv_dx, inv_dy, inv_dz, dt_over_mu):
    # Hx: curl terms dEz/dy and dEy/dz
    dez = np.diff(Ez, axis=1) * inv_dy
    dey = np.diff(Ey, axis=2) * inv_dz
    phxy *= _ay(bhy)
    phxy += _ay(chy) * dez
    phxz *= _az(bhz)
    phxz += _az(chz) * dey
    Hx -= dt_over_mu * ((dez * _ay(ikhy) + phxy) - (dey * _az(ikhz) + phxz))

    # Hy: dEx/dz and dEz/dx
    dex = np.diff(Ex, axis=2) * inv_dz
    dez = np.diff(Ez, axis=0) * inv_dx
    phyz *= _az(bhz)
    phyz += _az(chz) * dex
    phyx *= _ax(bhx)
    phyx += _ax(chx) * dez
    Hy -= dt_over_mu * ((dex * _az(ikhz) + phyz) - (dez * _ax(ikhx) + phyx))

    # Hz: dEy/dx and dEx/dy
    dey = np.diff(Ey, axis=0) * inv_dx
    dex = np.diff(Ex, axis=1) * inv_dy
    phzx *= _ax(bhx)
    phzx += _ax(chx) * dey
    phzy *= _ay(bhy)
    phzy += _ay(chy) * dex
    Hz -= dt_over_mu * ((dey * _ax(ikhx) + phzx) - (dex * _ay(ikhy) + phzy))


def update_e(Ex, Ey, Ez, Hx, Hy, Hz,
             caex, cbex, caey, cbey, caez, cbez,
             pexy, pexz, peyx, peyz, pezx, pezy,
             bex, cex, bey, cey, bez, cez,
             ikex, ikey, ikez,
             inv_dx, inv_dy, inv_dz):
    ny = Ex.shape[1] - 1
    nz = Ex.shape[2] - 1
    nx = Ey.shape[0] - 1

    # Ex interior: j in 1..ny-1, k in 1..nz-1
    dhz = (Hz[:, 1:, 1:nz] - Hz[:, :-1, 1:nz]) * inv_dy
    dhy = (Hy[:, 1:ny, 1:] - Hy[:, 1:ny, :-1]) * inv_dz
    p1 = pexy[:, 1:ny, 1:nz]
    p1 *= _ay(bey[1:ny])
    p1 += _ay(cey[1:ny]) * dhz
    p2 = pexz[:, 1:ny, 1:nz]
    p2 *= _az(bez[1:nz])
    p2 += _az(cez[1:nz]) * dhy
    v = Ex[:, 1:ny, 1:nz]
    v *= caex[:, 1:ny, 1:nz]
    v += cbex[:, 1:ny, 1:nz] * (
        (dhz * _ay(ikey[1:ny]) + p1) - (dhy * _az(ikez[1:nz]) + p2))

    # Ey interior: i in 1..nx-1, k in 1..nz-1
    dhx = (Hx[1:nx, :, 1:] - Hx[1:nx, :, :-1]) * inv_dz
    dhz = (Hz[1:, :, 1:nz] - Hz[:-1, :, 1:nz]) * inv_dx
    p1 = peyz[1:nx, :, 1:nz]
    p1 *= _az(bez[1:nz])
    p1 += _az(cez[1:nz]) * dhx
    p2 = peyx[1:nx, :, 1:nz]
    p2 *= _ax(bex[1:nx])
    p2 += _ax(cex[1:nx]) * dhz
    v = Ey[1:nx, :, 1:nz]
    v *= caey[1:nx, :, 1:nz]
    v += cbey[1:nx, :, 1:nz] * (
        (dhx * _az(ikez[1:nz]) + p1) - (dhz * _ax(ikex[1:nx]) + p2))

    # Ez interior: i in 1..nx-1, j in 1..ny-1
    dhy = (Hy[1:, 1:ny, :] - Hy[:-1, 1:ny, :]) * inv_dx
    dhx = (Hx[1:nx, 1:, :] - Hx[1:nx, :-1, :]) * inv_dy
    p1 = pezx[1:nx, 1:ny, :]
    p1 *= _ax(bex[1:nx])
    p1 += _ax(cex[1:nx]) * dhy
    p2 = pezy[1:nx, 1:ny, :]
    p2 *= _ay(bey[1:ny])
    p2 += _ay(cey[1:ny]) * dhx
    v = Ez[1:nx, 1:ny, :]
    v *= caez[1:nx, 1:ny, :]
    v += cbez[1:nx, 1:ny, :] * (
        (dhy * _ax(ikex[1:nx]) + p1) - (dhx * _ay(ikey[1:ny]) + p2))
