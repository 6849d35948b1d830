"""Numba-compiled Yee update kernels with CPML auxiliary convolutions.

Field layout (nx, ny, nz cells):
    Ex (nx, ny+1, nz+1)   Ey (nx+1, ny, nz+1)   Ez (nx+1, ny+1, nz)
    Hx (nx+1, ny, nz)     Hy (nx, ny+1, nz)     Hz (nx, ny, nz+1)

The 1-D CPML coefficient arrays (b, c, inverse kappa) are node-sampled for
the E update and half-cell-sampled for the H update; c is exactly zero
outside the absorbing layers, which gates the psi bookkeeping.
"""

import numba
from numba import prange


@numba.njit(parallel=True, fastmath=True, cache=True)
def update_h(Ex, Ey, Ez, Hx, Hy, Hz,
             phxy, phxz, phyx, phyz, phzx, phzy,
             bhx, chx, bhy, chy, bhz, chz,
             ikhx, ikhy, ikhz,
             inv_dx, inv_dy, inv_dz, dt_over_mu):
    nx1, ny, nz = Hx.shape
    for i in prange(nx1):
        for j in range(ny):
            byj = bhy[j]
            cyj = chy[j]
            ikyj = ikhy[j]
            for k in range(nz):
                dez = (Ez[i, j + 1, k] - Ez[i, j, k]) * inv_dy
                dey = (Ey[i, j, k + 1] - Ey[i, j, k]) * inv_dz
                if cyj != 0.0:
                    p = byj * phxy[i, j, k] + cyj * dez
                    phxy[i, j, k] = p
                    t1 = dez * ikyj + p
                else:
                    t1 = dez
                if chz[k] != 0.0:
                    p = bhz[k] * phxz[i, j, k] + chz[k] * dey
                    phxz[i, j, k] = p
                    t2 = dey * ikhz[k] + p
                else:
                    t2 = dey
                Hx[i, j, k] -= dt_over_mu * (t1 - t2)

    nx, ny1, nz = Hy.shape
    for i in prange(nx):
        bxi = bhx[i]
        cxi = chx[i]
        ikxi = ikhx[i]
        for j in range(ny1):
            for k in range(nz):
                dex = (Ex[i, j, k + 1] - Ex[i, j, k]) * inv_dz
                dez = (Ez[i + 1, j, k] - Ez[i, j, k]) * inv_dx
                if chz[k] != 0.0:
                    p = bhz[k] * phyz[i, j, k] + chz[k] * dex
                    phyz[i, j, k] = p
                    t1 = dex * ikhz[k] + p
                else:
                    t1 = dex
                if cxi != 0.0:
                    p = bxi * phyx[i, j, k] + cxi * dez
                    phyx[i, j, k] = p
                    t2 = dez * ikxi + p
                else:
                    t2 = dez
                Hy[i, j, k] -= dt_over_mu * (t1 - t2)

    nx, ny, nz1 = Hz.shape
    for i in prange(nx):
        bxi = bhx[i]
        cxi = chx[i]
        ikxi = ikhx[i]
        for j in range(ny):
            byj = bhy[j]
            cyj = chy[j]
            ikyj = ikhy[j]
            for k in range(nz1):
                dey = (Ey[i + 1, j, k] - Ey[i, j, k]) * inv_dx
                dex = (Ex[i, j + 1, k] - Ex[i, j, k]) * inv_dy
                if cxi != 0.0:
                    p = bxi * phzx[i, j, k] + cxi * dey
                    phzx[i, j, k] = p
                    t1 = dey * ikxi + p
                else:
                    t1 = dey
                if cyj != 0.0:
                    p = byj * phzy[i, j, k] + cyj * dex
                    phzy[i, j, k] = p
                    t2 = dex * ikyj + p
                else:
                    t2 = dex
                Hz[i, j, k] -= dt_over_mu * (t1 - t2)


@numba.njit(parallel=True, fastmath=True, cache=True)
def update_e(Ex, Ey, Ez, Hx, Hy, Hz,
             caex, cbex, caey, cbey, caez, cbez,
             pexy, pexz, peyx, peyz, pezx, pezy,
             bex, cex, bey, cey, bez, cez,
             ikex, ikey, ikez,
             inv_dx, inv_dy, inv_dz):
    # Tangential E on the outer boundary is never updated (PEC backing).
    nx, ny1, nz1 = Ex.shape
    for i in prange(nx):
        for j in range(1, ny1 - 1):
            byj = bey[j]
            cyj = cey[j]
            ikyj = ikey[j]
            for k in range(1, nz1 - 1):
                dhz = (Hz[i, j, k] - Hz[i, j - 1, k]) * inv_dy
                dhy = (Hy[i, j, k] - Hy[i, j, k - 1]) * inv_dz
                if cyj != 0.0:
                    p = byj * pexy[i, j, k] + cyj * dhz
                    pexy[i, j, k] = p
                    t1 = dhz * ikyj + p
                else:
                    t1 = dhz
                if cez[k] != 0.0:
                    p = bez[k] * pexz[i, j, k] + cez[k] * dhy
                    pexz[i, j, k] = p
                    t2 = dhy * ikez[k] + p
                else:
                    t2 = dhy
                Ex[i, j, k] = caex[i, j, k] * Ex[i, j, k] + cbex[i, j, k] * (t1 - t2)

    nx1, ny, nz1 = Ey.shape
    for i in prange(1, nx1 - 1):
        bxi = bex[i]
        cxi = cex[i]
        ikxi = ikex[i]
        for j in range(ny):
            for k in range(1, nz1 - 1):
                dhx = (Hx[i, j, k] - Hx[i, j, k - 1]) * inv_dz
                dhz = (Hz[i, j, k] - Hz[i - 1, j, k]) * inv_dx
                if cez[k] != 0.0:
                    p = bez[k] * peyz[i, j, k] + cez[k] * dhx
                    peyz[i, j, k] = p
                    t1 = dhx * ikez[k] + p
                else:
                    t1 = dhx
                if cxi != 0.0:
                    p = bxi * peyx[i, j, k] + cxi * dhz
                    peyx[i, j, k] = p
                    t2 = dhz * ikxi + p
                else:
                    t2 = dhz
                Ey[i, j, k] = caey[i, j, k] * Ey[i, j, k] + cbey[i, j, k] * (t1 - t2)

    nx1, ny1, nz = Ez.shape
    for i in prange(1, nx1 - 1):
        bxi = bex[i]
        cxi = cex[i]
        ikxi = ikex[i]
        for j in range(1, ny1 - 1):
            byj = bey[j]
            cyj = cey[j]
            ikyj = ikey[j]
            for k in range(nz):
                dhy = (Hy[i, j, k] - Hy[i - 1, j, k]) * inv_dx
                dhx = (Hx[i, j, k] - Hx[i, j - 1, k]) * inv_dy
                if cxi != 0.0:
                    p = bxi * pezx[i, j, k] + cxi * dhy
                    pezx[i, j, k] = p
                    t1 = dhy * ikxi + p
                else:
                    t1 = dhy
                if cyj != 0.0:
                    p = byj * pezy[i, j, k] + cyj * dhx
                    pezy[i, j, k] = p
                    t2 = dhx * ikyj + p
                else:
                    t2 = dhx
                Ez[i, j, k] = caez[i, j, k] * Ez[i, j, k] + cbez[i, j, k] * (t1 - t2)
