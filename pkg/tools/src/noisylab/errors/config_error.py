class ConfigError(ValueError):
    """Raised for any usage error in the experiment configuration.

    ``key`` is the offending setting in its command-line spelling (e.g.
    ``noise-rate``) so the message can point the user at what to fix. The CLI
    turns this into exit code 1.
    """

    def __init__(self, key: str, reason: str):
        super().__init__(f"invalid setting '{key}': {reason}")
        self.key = key
        self.reason = reason
