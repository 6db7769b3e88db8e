"""Names of the automatic features and human-rated aspects, in reporting order."""

import re

# (key, label) for the 22 automatic features, in reporting order
FEATURES = (
    ("loudness_avg", "Loudness avg."),
    ("mod_loudness_avg", "mod. Loudness avg."),
    ("rms_energy_avg", "RMS Energy avg."),
    ("f0_avg", "f0 avg."),
    ("jitter_avg", "Jitter avg."),
    ("delta_jitter_avg", "Δ Jitter avg."),
    ("shimmer_avg", "Shimmer avg."),
    ("harmonicity_avg", "Harmonicity avg."),
    ("log_hnr_avg", "log. HNR avg."),
    ("pvq_avg", "PVQ avg."),
    ("speech_rate", "Speech Rate"),
    ("articulation_rate", "Articulation Rate"),
    ("avg_syllable_duration", "avg. Syllable Duration"),
    ("text_ratio_avg", "Text Ratio avg."),
    ("text_ratio_var", "Text Ratio var."),
    ("image_ratio_avg", "Image Ratio avg."),
    ("image_ratio_var", "Image Ratio var."),
    ("highlight", "Highlight of imp. Statements"),
    ("detailing_avg", "Level of Detailing avg."),
    ("detailing_var", "Level of Detailing var."),
    ("coverage_avg", "Coverage of Slide Content avg."),
    ("coverage_var", "Coverage of Slide Content var."),
)
FEATURE_KEYS = tuple(key for key, _ in FEATURES)

# (key, label) for the 15 Likert-rated aspects
ASPECTS = (
    ("clear_language", "Clear Language"),
    ("vocal_diversity", "Vocal Diversity"),
    ("filler_words", "Filler Words"),
    ("speed_of_presentation", "Speed of Presentation"),
    ("coverage_of_the_content", "Coverage of the Content"),
    ("level_of_detail", "Level of Detail"),
    ("highlight_of_imp_content", "Highlight of imp. Content"),
    ("summary", "Summary"),
    ("text_design", "Text Design"),
    ("image_design", "Image Design"),
    ("formula_design", "Formula Design"),
    ("table_design", "Table Design"),
    ("structure_of_presentation", "Structure of Presentation"),
    ("entry_level", "Entry Level"),
    ("overall_rating", "Overall Rating"),
)
ASPECT_KEYS = tuple(key for key, _ in ASPECTS)

KNOWLEDGE_GAIN = "knowledge_gain"


def slug(name):
    """'Highlight of imp. Content' -> 'highlight_of_imp_content'."""
    return re.sub(r"[^0-9a-z]+", "_", name.strip().lower()).strip("_")


def aspect_key(name):
    """Map an aspect key or label to its key; None if it is not a known aspect."""
    key = slug(name)
    return key if key in ASPECT_KEYS else None
