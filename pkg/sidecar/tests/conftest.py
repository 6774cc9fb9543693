import os

# fail fast instead of waiting out hub connection retries when the neural
# scorer probes for checkpoints in an offline environment
os.environ.setdefault("HF_HUB_OFFLINE", "1")
os.environ.setdefault("TRANSFORMERS_OFFLINE", "1")
