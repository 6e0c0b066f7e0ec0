"""Clustering, mixture modelling and embedding of hull parameter data."""

from .cluster import ClusterReport, ElbowResult, KMeansModel, cluster_report, elbow_scan, kmeans, silhouette_samples, silhouette_score
from .gmm import (
    GmmModel,
    OutlierReport,
    bic,
    component_prototypes,
    fit_gmm,
    interpolate_designs,
    log_density,
    novelty_check,
    outlier_scores,
    prototype_report,
    responsibilities,
    sample_gmm,
    sample_hulls,
    select_k,
)
from .normalize import Normalizer, fit_normalizer
from .tsne import EmbeddingResult, joint_p, tsne_embed
