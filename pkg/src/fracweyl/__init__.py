"""fracweyl: IFS attractors, affine fractal surfaces, affine Weyl groups,
and exact wavelet-set calculus."""

from .affine import AffineMap, lipschitz_bound
from .congruence import (
    AffineDilation1D,
    CongruenceWitness,
    DihedralAction1D,
    DyadicDilation,
    FundamentalDomainReport,
    LatticeTranslation,
    dilation_congruent,
    exponential_gram,
    g_congruent,
    is_fundamental_domain,
    translation_congruent,
)
from .fractal import (
    FractalFunction,
    InterpolationSet,
    LambdaVector,
    ScaleVector,
    check_joinup,
    fix_point,
    fractal_basis,
    gram_matrix,
    lambdas_from_interpolation,
    lambdas_of,
    orthonormalize,
    rb_apply,
)
from .ifs import (
    AttractorResult,
    IteratedSystem,
    PointCloud,
    attractor_iterate,
    hausdorff_distance,
    hutchinson_apply,
)
from .intervals import IntervalUnion
from .partition import (
    LabellingMap,
    PartitionScheme,
    Simplex,
    build_labelling,
    example2_scheme,
    interval_scheme,
    kappa_subdivision,
    validate_partition,
)
from .regions import PolyUnion, ball_polygon, square_cell
from .wavelets import (
    DilationReflectionSpec,
    ExpansiveMatrix,
    WaveletSetReport,
    basis_enumerator,
    check_pair,
    construct_1d,
    construct_dilation_reflection,
    journe_set,
    shannon_psi,
    shannon_set,
    verify_1d,
    verify_dilation_reflection,
    verify_nd,
)
from .weyl import (
    AffineReflectionSpec,
    AffineWeylAction,
    Ball,
    Box,
    FoldableFigure,
    RootSystemData,
    WeylWord,
    affine_reflect,
    cartan_integer,
    extend_function,
    fold,
    group_closure,
    positive_and_simple,
    rank2_catalog,
    reflect,
    tessellate,
)

__version__ = "0.1.0"
