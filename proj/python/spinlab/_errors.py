class SpinlabError(ValueError):
    """Raised for every library error; ``kind`` is the error name the CLI prints."""

    def __init__(self, kind, message):
        super().__init__(kind, message)
        self.kind = kind
        self.message = message

    def __str__(self):
        return f"{self.kind}: {self.message}"
