# tapAUC: trustworthy approximated partial-AUC training for anomaly detection
__version__ = "1.0.0"
