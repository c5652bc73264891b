"""
Counting subspaces from the Laplacian spectrum
==============================================

The number of subspaces is read off the largest gap between consecutive
eigenvalues of the normalized Laplacian.  We compare the sparse
representation graph with the classical |V V^T| affinity from a truncated
SVD, which is block diagonal only when the subspaces are independent.
"""
import numpy as np

from sscgeo.clustering import (build_affinity, build_coefficient_matrix, classical_affinity,
                               estimate_num_subspaces, normalized_laplacian)
from sscgeo.datagen import gen_fully_random, make_rng

for d in (3, 10):
    ds = gen_fully_random(n=50, d=d, L=6, rho=None, rng=make_rng(4, d), points=4 * d)
    ssc = normalized_laplacian(build_affinity(build_coefficient_matrix(ds.X)))
    svd = normalized_laplacian(classical_affinity(ds.X))
    print("d=%d, %d points, rank %d" % (d, ds.N, np.linalg.matrix_rank(ds.X)))
    for name, spec in (("sparse", ssc), ("classical", svd)):
        ev = np.sort(spec.eigenvalues)
        print("  %-9s L_hat=%-3d first eigenvalues %s"
              % (name, estimate_num_subspaces(spec), np.round(ev[:8], 3)))
