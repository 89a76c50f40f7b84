"""Fractional smoothness toolkit for finite metric measure spaces.

Weighted point sets with exact ball queries, median machinery, Whitney
covers, gradient-sequence and modulus norms, a median-based extension
operator with a fit/transform interface, constructive K-profiles, and
measure-density diagnostics.
"""

__version__ = "0.1.0"

from .space import (GeometryError, GridInfo, MetricMeasureSpace, SpaceConstants,
                    SubsetMask, build_grid, distance_to_mask, estimate_constants,
                    lattice_offsets, load_domain)
from .regions import (Region, box_region, carpet_area, carpet_level_areas,
                      disc_region, full_region, halfplane_region, make_carpet,
                      make_cusp, make_slit_disc, region_from_spec)
from .median import WeightedSample, median, median_defect, median_on_ball
from .cover import (PartitionOfUnity, WhitneyCover, cover_to_dict, dump_cover,
                    greedy_net, partition_of_unity, whitney_cover)
from .norms import (GradientSequence, NormReport, SmoothnessParams,
                    annulus_index, averaged_modulus, besov_modulus_norm,
                    canonical_gradient, canonical_single_gradient,
                    centered_modulus, centered_power_min, dyadic_range,
                    ep_modulus, hajlasz_norms, infimum_gradient, lebesgue_norm,
                    log_trapezoid_weights, lorentz_norm, maximal_function,
                    pair_lower_bound, padded_gradient, scale_average_profile,
                    sequence_norm, tl_function_norm, translation_modulus)
from .extend import (ExtensionParams, ExtensionResult, ValidityReport,
                     WhitneyExtension, combine_cutoff, cutoff, extend,
                     extension_gradient, local_extend, validity_constant)
from .interp import (EmbeddingReport, KDecomposition, KProfile, brute_force_k,
                     interpolation_norm, k_decomposition, k_profile,
                     lipschitz_validity, lorentz_embedding_check, sharp_maximal)
from .geometry import DensityReport, check_measure_density, log_radii
