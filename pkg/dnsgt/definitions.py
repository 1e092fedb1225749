# Domain-side special token ids.
PAD_ID = 0
MASK_ID = 1
UNK_ID = 2
DOMAIN_SPECIALS = ("<PAD>", "<MASK>", "<UNK>")
FIRST_REAL_DOMAIN_ID = len(DOMAIN_SPECIALS)

# Host-side special token id (also used for the host slot of PAD positions).
UNK_HOST_ID = 0
HOST_SPECIALS = ("<UNK_HOST>",)

MASK_TOKEN = DOMAIN_SPECIALS[MASK_ID]

# Ingest.
DNS_PORT = 53
QTYPE_A = 1
MAX_DOMAIN_BYTES = 253
DEFAULT_MIN_REQUESTS = 100
DEFAULT_RATIO_LOW = 0.985
DEFAULT_RATIO_HIGH = 1.015
DEFAULT_DEDUP_WINDOW = 5.0

# Masking.
DEFAULT_MASK_PROBABILITY = 0.10
DEFAULT_MASK_SPLIT = (0.80, 0.10, 0.10)

# Evaluation.
CV_THRESHOLDS = (0.01, 0.03, 0.05)
DEFAULT_MIN_OCCURRENCES = 5
DEFAULT_ANALYSIS_SEQUENCES = 200

# Bench.
BENCH_EXECUTIONS = 50
BENCH_WARMUP_BATCHES = 5

# File names.
MANIFEST_FILENAME = "manifest.json"
HOST_STATS_FILENAME = "host_stats.json"
VOCABULARY_FILENAME = "vocab.json"
CHECKPOINT_FILENAME = "model.dnsgt"
LOSS_CURVE_FILENAME = "loss.csv"
QUERIES_FILENAME = "queries.jsonl"
DOMAIN_LABELS_FILENAME = "domain_labels.jsonl"
OCCURRENCE_LABELS_FILENAME = "occurrence_labels.jsonl"
HOST_LABELS_FILENAME = "host_labels.jsonl"
SESSIONS_FILENAME = "sessions.jsonl"
SPLITS_FILENAME = "splits.json"
METRICS_FILENAME = "metrics.json"
ROC_CURVE_FILENAME = "roc.csv"
SCORES_FILENAME = "scores.csv"
HOST_PREDICTIONS_FILENAME = "host_predictions.jsonl"
PREDICTIONS_FILENAME = "predictions.jsonl"
EMBEDDINGS_JSONL_FILENAME = "embeddings.jsonl"
EMBEDDINGS_BINARY_FILENAME = "embeddings.bin"
ANALYSIS_FILENAME = "analysis.json"
BENCH_JSON_FILENAME = "bench.json"
BENCH_CSV_FILENAME = "bench.csv"

# Exit codes of the command line interface.
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA_ERROR = 2
EXIT_NUMERIC_FAILURE = 3
