"""Near-orthogonal-array subsampling with local-linear additive-model fitting."""

from .backfit import AdditiveFit, FitConfig, backfit, predict, predict_grid, solve_p2
from .bandwidth import CvSpec, cv_select
from .criterion import (
    criterion_l,
    delta,
    h_func,
    lower_bound_exact,
    lower_bound_weak,
    membership,
)
from .data import Dataset, ScaledView, SeededRng, load_csv, save_csv, scale_to_unit
from .oa import (
    GaloisField,
    OrthogonalArray,
    construct_oa,
    gf_new,
    random_oa,
    verify_strength,
    verify_weak_strength,
)
from .sampler import Subsample, audit_scores, ies_select, lowcon_select, random_select
from .smooth import center, epanechnikov, kernel_moments, norm_inf_product, smoother_matrix

__version__ = "0.1.0"
