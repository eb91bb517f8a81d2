"""Ideological bias auditing for search engine result pages."""

from .annotations import AggregatedLabel, Stance, WorkerJudgment, aggregate, fleiss_kappa, load_judgments
from .audit import AuditReport, TestPlan, default_plan, run_audit
from .bias import BiasSummary, LeaningScores, query_bias, summarize_bias
from .corpus import Dataset, DatasetError, Engine, Leaning, Location, Topic, load_dataset, matched_topics
from .metrics import Metric, MetricConfig, dcg_at_k, mean_scores, precision_at_k, rbp
from .stats import bonferroni, one_sample_ttest, paired_ttest, t_two_tailed_p, verdict

__version__ = "0.1.0"
