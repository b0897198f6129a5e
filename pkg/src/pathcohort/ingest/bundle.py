from dataclasses import dataclass, field


@dataclass
class BundleReport:
    """Consistency findings across features, lineage and records.

    ``findings`` holds ``(kind, id, detail)`` tuples for real defects;
    image-only and record-only patients are counted, not flagged, since
    unmatched patients are expected in practice.
    """

    findings: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)
    image_only: list = field(default_factory=list)
    record_only: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.findings

    def to_dict(self):
        return {
            "findings": [list(f) for f in self.findings],
            "counts": dict(self.counts),
            "image_only": list(self.image_only),
            "record_only": list(self.record_only),
        }

    def to_text(self):
        lines = [f"{k}: {v}" for k, v in self.counts.items()]
        lines += [f"{kind} {ident}: {detail}" for kind, ident, detail in self.findings]
        return "\n".join(lines) + "\n"


def validate_bundle(features, lineage, records):
    """Cross-check a feature set, its lineage and the patient records.

    Parameters
    ----------
    features : list of FeatureVector
    lineage : mapping
        ``patch_id -> (wsi_id, patient_id)``.
    records : SurvivalDataset or iterable of patient ids
    """
    report = BundleReport()
    record_ids = list(records.ids) if hasattr(records, "ids") else [str(r) for r in records]
    record_set = set(record_ids)
    for v in features:
        if v.patch_id not in lineage:
            report.findings.append(("missing_lineage", v.patch_id, "patch has no lineage row"))
        elif tuple(lineage[v.patch_id]) != (v.wsi_id, v.patient_id):
            wsi, patient = lineage[v.patch_id]
            report.findings.append((
                "lineage_conflict", v.patch_id,
                f"features say {v.wsi_id}/{v.patient_id}, lineage says {wsi}/{patient}"))
    image_patients = list(dict.fromkeys(p for _, p in lineage.values()))
    report.image_only = [p for p in image_patients if p not in record_set]
    image_set = set(image_patients)
    report.record_only = [p for p in record_ids if p not in image_set]
    report.counts = {
        "patches": len(features),
        "lineage_rows": len(lineage),
        "wsis": len({w for w, _ in lineage.values()}),
        "image_patients": len(image_patients),
        "record_patients": len(record_ids),
        "matched_patients": len(image_set & record_set),
        "image_only": len(report.image_only),
        "record_only": len(report.record_only),
    }
    return report
