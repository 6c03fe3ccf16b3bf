"""regspectra: spectral simulation toolkit for sparse uniform d-regular digraphs.

Subpackages/modules:

* :mod:`regspectra.digraph` -- exact and MCMC samplers, enumeration and
  serialization of n x n 0/1 matrices with all row and column sums d;
* :mod:`regspectra.linalg` -- in-repo dense kernels (Hessenberg QR
  eigenvalues, Golub-Kahan singular values, MGS projections);
* :mod:`regspectra.hermitization` -- shifted matrices, empirical spectral
  measures, log potentials, reference laws, singular-value tail/regime reports;
* :mod:`regspectra.normals` -- complex Gaussian vectors, random normals to row
  spans, correlation clusters, plane partitions, structure classification;
* :mod:`regspectra.anticonc` -- row resampling, support coupling, small-ball
  and row-distance experiments, distance-to-singular-value implication checks;
* :mod:`regspectra.experiments` / :mod:`regspectra.cli` -- config-driven
  experiment runner with deterministic CSV/JSON/SVG artifacts.
"""

__version__ = "0.1.0"
