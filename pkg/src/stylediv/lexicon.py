"""Built-in synonym groups used by the synonym-swap rule.

A token is swap-eligible when it appears in exactly one group; a swap
replaces it with a different member of the same group.
"""

SYNONYM_GROUPS: tuple[tuple[str, ...], ...] = (
    ("big", "large", "huge", "vast"),
    ("small", "little", "tiny", "minor"),
    ("fast", "quick", "rapid", "swift"),
    ("slow", "sluggish", "gradual", "leisurely"),
    ("happy", "glad", "cheerful", "joyful"),
    ("sad", "unhappy", "gloomy", "downcast"),
    ("start", "begin", "commence", "initiate"),
    ("end", "finish", "conclude", "complete"),
    ("buy", "purchase", "acquire", "obtain"),
    ("show", "display", "exhibit", "reveal"),
    ("help", "assist", "aid", "support"),
    ("try", "attempt", "endeavor", "strive"),
    ("smart", "clever", "bright", "sharp"),
    ("hard", "difficult", "tough", "demanding"),
    ("easy", "simple", "effortless", "straightforward"),
    ("old", "ancient", "aged", "elderly"),
    ("new", "novel", "fresh", "recent"),
    ("good", "fine", "great", "excellent"),
    ("bad", "poor", "awful", "terrible"),
    ("angry", "furious", "irate", "annoyed"),
    ("scared", "afraid", "frightened", "fearful"),
    ("rich", "wealthy", "affluent", "prosperous"),
    ("strange", "odd", "weird", "peculiar"),
    ("quiet", "silent", "calm", "hushed"),
    ("loud", "noisy", "booming", "deafening"),
    ("pretty", "lovely", "beautiful", "attractive"),
    ("ugly", "hideous", "unsightly", "grotesque"),
    ("say", "state", "remark", "mention"),
    ("look", "glance", "peek", "gaze"),
    ("walk", "stroll", "wander", "amble"),
    ("run", "sprint", "dash", "race"),
    ("eat", "consume", "devour", "ingest"),
    ("think", "believe", "reckon", "suppose"),
    ("make", "create", "produce", "build"),
    ("get", "gain", "earn", "secure"),
    ("use", "employ", "utilize", "apply"),
    ("need", "require", "demand", "want"),
    ("keep", "retain", "hold", "preserve"),
    ("idea", "notion", "concept", "thought"),
    ("job", "task", "chore", "duty"),
    ("house", "home", "dwelling", "residence"),
    ("road", "street", "avenue", "lane"),
    ("car", "automobile", "vehicle", "motorcar"),
    ("kid", "child", "youngster", "youth"),
    ("friend", "pal", "buddy", "companion"),
    ("problem", "issue", "trouble", "difficulty"),
    ("answer", "reply", "response", "retort"),
    ("often", "frequently", "regularly", "repeatedly"),
)


def build_index(groups=SYNONYM_GROUPS) -> dict[str, tuple[str, ...]]:
    index: dict[str, tuple[str, ...]] = {}
    for group in groups:
        for word in group:
            if word in index:
                raise ValueError(f"{word!r} appears in more than one synonym group")
            index[word] = group
    return index


SYNONYMS = build_index()
