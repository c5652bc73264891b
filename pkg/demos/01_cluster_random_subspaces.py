"""
Clustering points drawn from a few random subspaces
===================================================

Each point is written as the l1-smallest combination of the others.  When the
subspaces are far enough apart, those combinations only use points from the
same subspace, and the resulting graph splits into one component per
subspace.
"""
import numpy as np

from sscgeo.clustering import ssc_pipeline
from sscgeo.datagen import gen_fully_random, make_rng

# three 4-dimensional subspaces of R^30, 25 points each
ds = gen_fully_random(n=30, d=4, L=3, rho=None, rng=make_rng(0), points=25)
print("data:", ds.X.shape, "labels:", np.bincount(ds.labels)[1:])

res = ssc_pipeline(ds.X, seed=0, truth=ds.labels)

# columns of Z are the sparse representations; count the ones that stay in their class
own = [np.all(ds.labels[np.flatnonzero(res.Z[:, i])] == ds.labels[i]) for i in range(ds.N)]
print("columns supported on their own subspace: %d / %d" % (sum(own), ds.N))

print("estimated number of subspaces:", res.L_hat)
for key, value in res.metrics.to_dict().items():
    print("  %-24s %s" % (key, value))

# the smallest Laplacian eigenvalues: one zero per connected component
print("smallest eigenvalues:", np.round(np.sort(res.spectrum.eigenvalues)[:5], 6))
