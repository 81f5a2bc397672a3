#pragma once


#include <string_view>

namespace ifpref::mock {

// 3-7 letters; none starts with 'b' and none appears in the keyword list.
inline constexpr std::string_view kFiller[] = {
    "the",    "new",    "old",   "calm",   "each",   "every",  "quiet",  "rain",   "river",  "stone",  "cloud",
    "field",  "green",  "light", "night",  "warm",   "cold",   "early",  "late",   "small",  "large",  "still",
    "soft",   "clear",  "deep",  "high",   "long",   "short",  "wide",   "open",   "fresh",  "plain",  "round",
    "sharp",  "sweet",  "slow",  "quick",  "wild",   "tame",   "proud",  "humble", "honest", "gentle", "simple",
    "steady", "lively", "sunny", "rainy",  "windy",  "misty",  "frosty", "dusty",  "sandy",  "rocky",  "grassy",
    "leafy",  "hollow", "narrow", "silent", "golden", "silver", "copper", "amber",  "ivory",  "scarlet", "violet",
    "olive",  "coral",  "pearl", "moss",   "fern",   "pine",   "cedar",  "maple",  "willow", "aspen",  "heron",
    "swan",   "crane",  "otter", "fox",    "deer",   "hare",   "wolf",   "lynx",   "eagle",  "hawk",   "owl",
    "wren",   "finch",  "lark",  "dove",   "raven",  "robin",  "path",   "road",
};

inline constexpr std::string_view kKeywords[] = {
    "door",   "space",  "chaos", "lamp",   "anchor", "garden", "mirror", "ticket", "puzzle", "market",
    "engine", "castle", "letter", "pocket", "rocket", "island", "candle", "harbor", "jacket", "ladder",
    "magnet", "needle", "orange", "pencil", "quilt",  "saddle", "tunnel", "velvet", "wagon",  "zipper",
    "acorn",  "forest", "glove",  "hammer", "kettle", "lemon",  "mango",  "nickel", "parrot", "spoon",
};

inline constexpr std::string_view kFirstWords[] = {
    "today", "then", "next", "later", "still", "after", "once", "soon", "often", "here", "now", "again",
};

inline constexpr std::string_view kBoldWords[] = {
    "go", "up", "on", "to", "so", "do", "we", "it", "me", "my", "us", "at",
};

inline constexpr std::string_view kPlaceholders[] = {
    "name", "date", "city", "place", "topic", "item", "price", "time", "person", "event",
};

// Lengths 8-18, used for long-word and word-length features.
inline constexpr std::string_view kLongWords[] = {
    "absolute",         "mountain",          "darkness",          "featured",          "judgment",
    "notebook",         "painting",          "shoulder",          "sunlight",          "vineyard",
    "adventure",        "attention",         "celebrate",         "community",         "dangerous",
    "household",        "knowledge",         "lightning",         "telescope",         "wonderful",
    "background",       "collection",        "comfortable",       "particular",        "generation",
    "impossible",       "restaurant",        "understand",        "atmosphere",        "expedition",
    "accumulated",      "combination",       "development",       "imagination",       "temperature",
    "opportunity",      "electricity",       "environment",       "achievement",       "conversation",
    "architecture",     "characterize",      "entertaining",      "neighborhood",      "undercurrent",
    "accomplishment",   "communications",    "extraordinary",     "investigation",     "unfortunately",
    "administration",   "identification",    "responsibility",    "transformation",    "representative",
    "conceptualization", "internationally",  "misunderstanding",  "characteristically", "disproportionately",
};

// First letters with at least six filler words, for alliteration runs.
inline constexpr std::string_view kAlliterationLetters = "swrcfhlpg";

inline constexpr std::string_view kForms[] = {
    "short story", "poem",     "blog post",  "product description", "letter",
    "speech",      "dialogue", "news brief", "travel guide",        "recipe introduction",
};

inline constexpr std::string_view kTopics[] = {
    "a lighthouse keeper",     "urban gardening",      "the first day of school", "a lost suitcase",
    "volcanoes",               "a bakery at dawn",      "remote work",             "a chess tournament",
    "honeybees",               "an old bicycle",        "a mountain village",      "solar energy",
    "a rainy afternoon",       "a new smartphone",      "the deep ocean",          "a family reunion",
    "a local library",         "street food",           "winter migration",        "a retired astronaut",
    "a jazz club",             "recycling at home",     "a forgotten map",         "learning to swim",
    "a desert road trip",      "a community orchestra", "an abandoned train station", "coffee farming",
    "a museum night tour",     "kite festivals",
};

inline constexpr std::string_view kQualifiers[] = {
    "for a young audience",      "in a hopeful tone",         "from the point of view of a stranger",
    "for a local newspaper",     "in a humorous style",       "that ends with a surprise",
    "for a school assembly",     "in the style of a diary",   "aimed at busy parents",
    "as if it were a legend",
};

}  // namespace ifpref::mock
