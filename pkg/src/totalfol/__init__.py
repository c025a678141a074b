"""Total foliation construction ledgers and model checks."""
