"""Exception and warning types raised across pathcohort."""


class PathCohortError(ValueError):
    """Base class for all input/domain errors raised by this package."""


# features
class EmptyTissue(PathCohortError):
    pass


class DegenerateStain(PathCohortError):
    pass


class UnknownNucleus(PathCohortError, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


class NoPairs(PathCohortError):
    pass


class NoValidNuclei(PathCohortError):
    pass


# index
class DimensionMismatch(PathCohortError):
    pass


class InvalidValue(DimensionMismatch):
    """Non-finite entry where only finite reals are accepted."""


class EmptyIndex(PathCohortError):
    pass


class TooFewPositives(PathCohortError):
    pass


class MissingLineage(PathCohortError):
    def __init__(self, patch_id):
        super().__init__(f"no lineage row for patch {patch_id!r}")
        self.patch_id = patch_id


class IndexFormatError(PathCohortError):
    pass


# survival
class EmptySubset(PathCohortError):
    pass


class EmptyGroup(PathCohortError):
    pass


class NonFinite(PathCohortError, ArithmeticError):
    pass


class NoSE(PathCohortError):
    pass


class Degenerate(PathCohortError):
    pass


# personalize
class CohortTooSmall(PathCohortError):
    def __init__(self, found, needed):
        super().__init__(f"cohort has {found} usable patients, need {needed}")
        self.found = found
        self.needed = needed


class MissingRecords(PathCohortError):
    def __init__(self, patient_ids):
        ids = list(patient_ids)
        super().__init__(f"no usable records for patients: {', '.join(map(str, ids))}")
        self.patient_ids = ids


class SpecInvalid(PathCohortError):
    pass


class UnknownPatient(PathCohortError, KeyError):
    """Query patient has no patches in the lineage/index."""

    def __init__(self, patient_id, suggestions=()):
        self.patient_id = patient_id
        self.suggestions = list(suggestions)
        msg = f"unknown patient {patient_id!r}"
        if self.suggestions:
            msg += "; nearest known ids: " + ", ".join(self.suggestions)
        super().__init__(msg)

    def __str__(self):
        return ValueError.__str__(self)


class FitFailed(PathCohortError):
    """Cohort model fit failed; ``partial`` holds the report built so far."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


# ingest
class HeaderMismatch(PathCohortError):
    def __init__(self, missing=(), extra=(), message=None):
        self.missing = list(missing)
        self.extra = list(extra)
        if message is None:
            parts = []
            if self.missing:
                parts.append("missing columns: " + ", ".join(self.missing))
            if self.extra:
                parts.append("unexpected columns: " + ", ".join(self.extra))
            message = "; ".join(parts) or "header mismatch"
        super().__init__(message)


class BadValue(PathCohortError):
    def __init__(self, row, column, value, reason=""):
        self.row = row
        self.column = column
        self.value = value
        msg = f"bad value {value!r} at row {row}, column {column!r}"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class NoUsableRows(PathCohortError):
    pass


class SeparationWarning(UserWarning):
    """Coefficient magnitude blew past the separation bound (monotone likelihood)."""

