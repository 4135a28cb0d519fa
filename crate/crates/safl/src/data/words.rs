//! Default word list for synthetic data generation: common English words,
//! skewed toward natural letter frequencies so generated lexicons show the
//! usual long-tailed character histogram.

pub const WORDS: &[&str] = &[
    "the", "and", "for", "are", "but", "not", "you", "all", "can", "had",
    "her", "was", "one", "our", "out", "day", "get", "has", "him", "his",
    "how", "man", "new", "now", "old", "see", "two", "way", "who", "boy",
    "did", "its", "let", "put", "say", "she", "too", "use", "that", "with",
    "have", "this", "will", "your", "from", "they", "know", "want", "been",
    "good", "much", "some", "time", "very", "when", "come", "here", "just",
    "like", "long", "make", "many", "more", "only", "over", "such", "take",
    "than", "them", "well", "were", "what", "word", "work", "year", "back",
    "call", "came", "each", "even", "find", "give", "hand", "high", "keep",
    "last", "left", "life", "live", "look", "made", "most", "move", "must",
    "name", "need", "next", "open", "part", "play", "said", "same", "seem",
    "show", "side", "tell", "turn", "used", "ways", "week", "went", "west",
    "about", "after", "again", "along", "began", "begin", "being", "below",
    "between", "both", "bring", "build", "carry", "change", "close", "cold",
    "could", "cross", "didnt", "different", "early", "earth", "eight", "every",
    "example", "face", "family", "far", "father", "feet", "few", "first",
    "follow", "food", "form", "found", "four", "girl", "going", "great",
    "group", "grow", "half", "hard", "head", "hear", "heard", "help", "hello",
    "home", "house", "idea", "important", "into", "kind", "knew", "land",
    "large", "later", "learn", "leave", "light", "line", "list", "little",
    "look", "love", "main", "mean", "might", "mile", "miss", "money", "morning",
    "mother", "mountain", "music", "near", "never", "night", "north", "often",
    "once", "other", "page", "paper", "picture", "place", "plant", "point",
    "read", "real", "right", "river", "road", "room", "run", "saw", "school",
    "sea", "second", "sentence", "set", "ship", "short", "should", "since",
    "sing", "small", "sound", "south", "spell", "stand", "start", "state",
    "still", "stop", "story", "study", "sun", "sure", "talk", "thing", "think",
    "those", "thought", "three", "through", "together", "told", "took", "tree",
    "under", "until", "walk", "watch", "water", "where", "while", "white",
    "whole", "why", "without", "world", "would", "write", "young", "above",
    "across", "against", "almost", "alone", "already", "although", "always",
    "among", "animal", "another", "answer", "appear", "area", "become", "before",
    "behind", "best", "better", "black", "blue", "board", "body", "book",
    "bottom", "box", "break", "brought", "brown", "building", "business",
    "certain", "check", "children", "city", "class", "clear", "color",
    "common", "complete", "contain", "correct", "country", "course", "cover",
    "cried", "dark", "decide", "deep", "door", "down", "draw", "dress",
    "drive", "during", "ease", "east", "easy", "eat", "else", "end", "enough",
    "ever", "eye", "fact", "fall", "fast", "feel", "field", "figure", "fine",
    "fire", "fish", "five", "fly", "force", "friend", "front", "full", "game",
    "gave", "gold", "gone", "got", "green", "ground", "happen", "heat",
    "heavy", "held", "hill", "hold", "horse", "hot", "hour", "however",
    "hundred", "ice", "inch", "inside", "island", "job", "jump", "jungle",
    "just", "king", "kitchen", "knife", "lady", "lake", "language", "lay",
    "lead", "less", "letter", "level", "listen", "low", "machine", "map",
    "mark", "matter", "maybe", "measure", "meet", "member", "men", "mind",
    "minute", "moon", "moment", "month", "mix", "note", "nothing", "notice",
    "number", "object", "ocean", "off", "oil", "order", "own", "pass", "past",
    "pattern", "pay", "person", "piece", "plan", "plane", "power", "press",
    "problem", "produce", "pull", "purple", "question", "quick", "quiet",
    "quite", "race", "rain", "raise", "ran", "reach", "ready", "record",
    "red", "remember", "rest", "ride", "rock", "round", "rule", "sat",
    "scene", "science", "seed", "sense", "serve", "seven", "several", "shape",
    "sharp", "sheet", "shoe", "shop", "shore", "shown", "sign", "simple",
    "single", "sister", "six", "size", "sky", "sleep", "slow", "snow",
    "soldier", "someone", "song", "soon", "space", "speak", "special",
    "speed", "spring", "square", "stay", "step", "stone", "stood", "store",
    "street", "strong", "subject", "suddenly", "summer", "surface", "system",
    "table", "tail", "teach", "team", "ten", "test", "themselves", "third",
    "thousand", "today", "top", "toward", "town", "travel", "true", "try",
    "type", "unit", "upon", "usual", "village", "voice", "vowel", "wait",
    "warm", "wear", "weather", "wheel", "wild", "wind", "window", "winter",
    "wish", "wood", "written", "wrong", "yard", "yellow", "yes", "zero",
    "zone", "zoo", "quiz", "jazz", "exact", "extra", "oxygen", "pizza",
    "puzzle", "lazy", "crazy", "dozen", "frozen", "magic", "major", "enjoy",
];
