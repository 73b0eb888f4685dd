"""Second-order finite-difference Dirichlet Poisson solver used as a test oracle."""

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg


def fd_stream(forcing, n_x, n_y):
    """Solve lap psi = forcing on [0, 2pi) x [-1, 1], periodic in x, psi = 0 at y = +-1.

    ``forcing(X, Y)`` is evaluated on the interior nodes; returns (x, y, psi)
    with y including the walls (n_y + 1 nodes).
    """
    hx = 2 * np.pi / n_x
    hy = 2.0 / n_y
    x = hx * np.arange(n_x)
    y = -1.0 + hy * np.arange(n_y + 1)
    yi = y[1:-1]
    ex = np.ones(n_x)
    Dxx = sparse.diags([ex[:-1], -2 * ex, ex[:-1]], [-1, 0, 1], format="lil")
    Dxx[0, n_x - 1] = 1
    Dxx[n_x - 1, 0] = 1
    Dxx = Dxx.tocsr() / hx**2
    ny = n_y - 1
    ey = np.ones(ny)
    Dyy = sparse.diags([ey[:-1], -2 * ey, ey[:-1]], [-1, 0, 1], format="csr") / hy**2
    A = sparse.kron(Dxx, sparse.identity(ny)) + sparse.kron(sparse.identity(n_x), Dyy)
    X, Y = np.meshgrid(x, yi, indexing="ij")
    rhs = forcing(X, Y).ravel()
    sol = splinalg.spsolve(A.tocsc(), rhs)
    psi = np.zeros((n_x, n_y + 1), dtype=sol.dtype)
    psi[:, 1:-1] = sol.reshape(n_x, ny)
    return x, y, psi
