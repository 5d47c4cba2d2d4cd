"""Simulation and exact verification for percolation, Ising, FK and
XOR-Ising models on finite balls of vertex-transitive planar tilings."""

from .clusters import (BondBoundary, BondConfig, ClusterLabeling,
                       ClusterReport, SiteConfig, SpinBoundary,
                       bond_clusters, count_open_clusters,
                       label_bond_clusters, label_site_clusters,
                       site_clusters)
from .contours import (ContourReport, DerivedConfigs, derive,
                       eta_contours, eta_structure_check,
                       face_parity_check, phi_contour_identity,
                       phi_contours, phi_plus_contours, proxy_triple)
from .errors import (BudgetExceeded, ConfigError, DomainError,
                     HyperpercError, InsufficientData, MapMismatch,
                     NonPositive, RadiusTooLarge, StructureViolation,
                     SupportMismatch, TooLarge, UnrealizableTiling)
from .experiments import (ExperimentConfig, PcEstimate, RunRecord,
                          TrendReport, estimate_pc_site, growth_trend,
                          parse_config, read_records, run_sweep,
                          serialize_config, write_records)
from .oracle import (CertReport, DominationReport, ExactMeasure, TVReport,
                     coupling_check, domination_evidence, enumerate_fk,
                     enumerate_ising, es_bond_marginals, holley_check,
                     product_measure, xor_measure)
from .planar_map import (BallSpec, CombinatorialMap, Geometry,
                         GeometryClass, Superposition, TilingSpec,
                         build_ball, classify, dual, embed,
                         map_from_embedding, map_from_rotation_lists,
                         superpose)
from .render import render_svg
from .samplers import (CouplingParams, RngSpec, ThresholdReport,
                       coupling_from_wired_threshold,
                       edwards_sokal_color, fk_heatbath_sweep,
                       glauber_sweep, ising_height_from_site_threshold,
                       ising_two_point_window, max_coupling,
                       sample_bernoulli, sample_bernoulli_bonds,
                       swendsen_wang_sweep, thresholds,
                       wired_threshold_lower_bound,
                       xor_height_from_site_threshold,
                       xor_two_point_window)
from .xor import (SELF_DUAL_COUPLING, XorConfig, contour_weights,
                  dual_coupling, xor_of, z_contour_expansion,
                  z_double_ising)

__version__ = "0.1.0"
