"""Daily-motif discovery and classification for imported-energy data.

The library finds, for each consumer, the most repeated daily
sub-pattern of their smart-meter imported-energy series under a masked,
weighted time-warping distance, and classifies consumers (rooftop-PV
owners, electric-heating users) from that single day with a
single-neuron model.  Intuitive baselines, a synthetic population
generator and an evaluation harness round out the pipeline.
"""

from .baselines import (LoadDurationCurve, average_daily_profile,
                        counting_zeros, duration_distance,
                        fit_distance_threshold, load_duration_classify,
                        load_duration_curve, zero_count)
from .classifier import (ClassifierModel, Prediction, TrainConfig, load_model,
                         predict, predict_batch, rank_consumers, save_model,
                         train)
from .config import RunConfig, build_run_config, read_kv_config
from .core import (CleaningPolicy, ConsumerSeries, DayMatrix, MaskSpec,
                   WeightMatrix, build_weight_matrix, clean_series,
                   daylight_mask, full_mask, ingest_csv, midday_mask,
                   segment_days, slice_days)
from .datagen import (GroundTruth, GroundTruthEntry, PopulationConfig,
                      emit_low_ratio_cohort, load_ground_truth,
                      simulate_population, write_consumers_csv,
                      write_ground_truth)
from .distance import (dtw, euclidean, kernel_counters, r_dtw,
                       reset_kernel_counters, z_normalize)
from .errors import ConfigError, DataError, DivergenceError, UsageError
from .evaluation import (Metrics, cohort_report, confusion_metrics, evaluate,
                         export_histogram, write_metrics_csv)
from .motif import (DistanceTable, Motif, SimilarityProfile, distance_table,
                    extract_motif, matrix_profile_motif, read_motifs_csv,
                    similarity_profile, update_motif, write_motifs_csv)
from .pipeline import (calibrate_threshold, discover_refined_motif,
                       extract_motifs, split_ids)

__version__ = "0.1.0"
