from enum import Enum


class MethodKind(Enum):
    BASELINE = "baseline"
    COTEACHING = "coteaching"
    JOCOR = "jocor"
    MDA = "mda"
    COTEACHING_MDA = "coteaching_mda"

    @property
    def uses_two_models(self) -> bool:
        return self is not MethodKind.BASELINE

    @staticmethod
    def names() -> "list[str]":
        return [kind.value for kind in MethodKind]
