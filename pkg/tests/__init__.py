import os


os.environ["USE_DNSGT_LOG_HANDLER"] = "1"
