"""Activity codes used throughout the pipeline."""

ACTIVITIES = {
    "A1": "walking",
    "A2": "sitting on the bed",
    "A3": "sitting on the chair",
    "A4": "lying down on the bed",
    "A5": "lying down on the floor",
    "A6": "empty room",
    "A7": "transition",
}

CODES = tuple(ACTIVITIES)


def check_label(label):
    if label not in ACTIVITIES:
        raise ValueError(f"unknown activity label {label!r}; expected one of {', '.join(CODES)}")
    return label
