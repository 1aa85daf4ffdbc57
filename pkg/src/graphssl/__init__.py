"""Semi-supervised data representation via learned affinity graphs."""

from .data import DataSet, load_dataset, normalize, save_dataset
from .evaluation import AccuracyReport, ClusteringResult, KMeansConfig, accuracy, kmeans
from .fgnmf import NmfModel, fit_fgnmf, fit_nmf, nmf_objective, predict_clusters_nmf
from .fgsc import (SparseCodingModel, fit_fgsc, gsc_objective, predict_clusters_gsc,
                   update_codes, update_dictionary)
from .graph import (AffinityGraph, build_learned_graph, default_bandwidth, full_adjacency,
                    gaussian_reweight, knn_sparsify, label_weight_graph,
                    unsupervised_gaussian_graph)
from .laplacian import GraphLaplacian, build_laplacian, smoothness
from .metric import (LabeledPairs, MetricMatrix, enumerate_pairs, identity_metric,
                     learn_kiss_metric, metric_distance_sq)

__version__ = "0.1.0"
