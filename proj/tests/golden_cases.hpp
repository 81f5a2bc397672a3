#pragma once

// Hand-labelled verifier cases; each kind has at least three satisfied and
// three violated examples.

#include <string>
#include <vector>

#include <json.hpp>

#include "ifpref/constraints.hpp"

namespace ifpref::testing {

struct GoldenCase {
  const char* id;
  const char* kwargs;  // JSON object
  const char* text;
  bool expected;
};

inline const std::vector<GoldenCase>& golden_cases() {
  static const std::vector<GoldenCase> cases = {
      {"alliteration", R"({"num_alliteration_words":3})", "Big brown bears roam.", true},
      {"alliteration", R"({"num_alliteration_words":3})", "Silly Sam sings songs.", true},
      {"alliteration", R"({"num_alliteration_words":3})", "We saw six slow snails.", true},
      {"alliteration", R"({"num_alliteration_words":5})", "She sells sea shells swiftly today", true},
      {"alliteration", R"({"num_alliteration_words":3})", "Big red bears roam.", false},
      {"alliteration", R"({"num_alliteration_words":3})", "Two tall 3 tigers", false},
      {"alliteration", R"({"num_alliteration_words":3})", "", false},
      {"alliteration", R"({"num_alliteration_words":5})", "She sells sea shells today", false},

      {"ascending_num_words", "{}", "One. Two three. Four five six.", true},
      {"ascending_num_words", "{}", "Single sentence only", true},
      {"ascending_num_words", "{}", "Hi! How are you? I am doing well today.", true},
      {"ascending_num_words", "{}", "One two. Three.", false},
      {"ascending_num_words", "{}", "One two. Three four.", false},
      {"ascending_num_words", "{}", "A. B c. D e f. G h.", false},

      {"edit_response", R"({"separator":"------"})", "First draft.\n------\nBetter draft.", true},
      {"edit_response", R"({"separator":"------"})", "a ------ b", true},
      {"edit_response", R"({"separator":"------"})", "Draft one------Draft two", true},
      {"edit_response", R"({"separator":"------"})", "No separator here.", false},
      {"edit_response", R"({"separator":"------"})", "------\nOnly the second part.", false},
      {"edit_response", R"({"separator":"------"})", "A\n------\nB\n------\nC", false},

      {"end_quotation", "{}", "He said hello. \"This is the end.\"", true},
      {"end_quotation", "{}", "\"Only one quoted sentence\"", true},
      {"end_quotation", "{}", "Intro line. “Curly quotes work”", true},
      {"end_quotation", "{}", "He said \"hello\" at the start.", false},
      {"end_quotation", "{}", "\"Quoted first.\" Then plain.", false},
      {"end_quotation", "{}", "", false},
      {"end_quotation", "{}", "Plain ending.", false},

      {"first_letter_capital", "{}", "Every Word Here Starts Big.", true},
      {"first_letter_capital", "{}", "The 3 Cats Sat.", true},
      {"first_letter_capital", "{}", "ALL CAPS ARE FINE", true},
      {"first_letter_capital", "{}", "Every word here", false},
      {"first_letter_capital", "{}", "Hello World and Friends", false},
      {"first_letter_capital", "{}", "Good Day, my Friend.", false},

      {"frequency_long_words", R"({"relation":"at least","num_words":2,"word_length":8})",
       "Wonderful adventures await.", true},
      {"frequency_long_words", R"({"relation":"at least","num_words":2,"word_length":8})",
       "Impressive, magnificent, extraordinary.", true},
      {"frequency_long_words", R"({"relation":"at most","num_words":1,"word_length":8})", "A short note.", true},
      {"frequency_long_words", R"({"relation":"exactly","num_words":1,"word_length":10})", "One remarkable day.",
       true},
      {"frequency_long_words", R"({"relation":"at least","num_words":2,"word_length":8})", "Wonderful day.", false},
      {"frequency_long_words", R"({"relation":"at least","num_words":2,"word_length":8})", "", false},
      {"frequency_long_words", R"({"relation":"at most","num_words":1,"word_length":8})",
       "Wonderful adventures await.", false},

      {"keywords_ordered", R"({"keywords":["apple","banana","cherry"]})",
       "I ate an apple, then a banana, then a cherry.", true},
      {"keywords_ordered", R"({"keywords":["apple","banana","cherry"]})", "APPLE and Banana before cherry pie.", true},
      {"keywords_ordered", R"({"keywords":["apple","banana","cherry"]})", "apple banana cherry apple", true},
      {"keywords_ordered", R"({"keywords":["apple","banana","cherry"]})", "banana apple cherry", false},
      {"keywords_ordered", R"({"keywords":["apple","banana","cherry"]})", "apple cherry", false},
      {"keywords_ordered", R"({"keywords":["apple","banana","cherry"]})", "pineapple banana cherry", false},
      {"keywords_ordered", R"({"keywords":["apple","banana","cherry"]})", "apple cherry banana cherry", false},

      {"max_word_length", R"({"max_word_length":5})", "Short words only.", true},
      {"max_word_length", R"({"max_word_length":5})", "I am ok.", true},
      {"max_word_length", R"({"max_word_length":5})", "Don't stop.", true},
      {"max_word_length", R"({"max_word_length":5})", "Extraordinary", false},
      {"max_word_length", R"({"max_word_length":5})", "Hello wonder", false},
      {"max_word_length", R"({"max_word_length":5})", "Yes, absolutely.", false},

      {"no_period", "{}", "No periods here!", true},
      {"no_period", "{}", "Question? Yes!", true},
      {"no_period", "{}", "Just words", true},
      {"no_period", "{}", "One sentence.", false},
      {"no_period", "{}", "Version 1.2 is out", false},
      {"no_period", "{}", "Wait...", false},

      {"nth_sentence_capital", R"({"nth_sentence":2})", "First is normal. SECOND IS LOUD. Third is calm.", true},
      {"nth_sentence_capital", R"({"nth_sentence":2})", "Hi there. YES!", true},
      {"nth_sentence_capital", R"({"nth_sentence":1})", "HELLO WORLD. then quiet.", true},
      {"nth_sentence_capital", R"({"nth_sentence":2})", "First is normal. Second is not loud. Third.", false},
      {"nth_sentence_capital", R"({"nth_sentence":2})", "ONE ONLY.", false},
      {"nth_sentence_capital", R"({"nth_sentence":2})", "FIRST LOUD. SECOND LOUD.", false},
      {"nth_sentence_capital", R"({"nth_sentence":2})", "First ok. 123 456.", false},

      {"nth_sentence_first_word", R"({"first_word":"however","num_sentences":3,"nth_sentence":2})",
       "It rained. However, we walked. Then we rested.", true},
      {"nth_sentence_first_word", R"({"first_word":"however","num_sentences":3,"nth_sentence":2})",
       "One. HOWEVER it ended.", true},
      {"nth_sentence_first_word", R"({"first_word":"however","num_sentences":3,"nth_sentence":2})",
       "A. however small. C.", true},
      {"nth_sentence_first_word", R"({"first_word":"however","num_sentences":3,"nth_sentence":2})",
       "However it rained. We walked.", false},
      {"nth_sentence_first_word", R"({"first_word":"however","num_sentences":3,"nth_sentence":2})",
       "Just one sentence.", false},
      {"nth_sentence_first_word", R"({"first_word":"however","num_sentences":3,"nth_sentence":2})",
       "It rained. Howevermore we walked.", false},

      {"num_words_per_sentence", R"({"relation":"at most","num_words":4})", "Short one. Another short one.", true},
      {"num_words_per_sentence", R"({"relation":"at most","num_words":4})", "Hi! Yes? Okay.", true},
      {"num_words_per_sentence", R"({"relation":"at least","num_words":3})", "This has three. This has four words.",
       true},
      {"num_words_per_sentence", R"({"relation":"at most","num_words":4})",
       "This sentence has far too many words.", false},
      {"num_words_per_sentence", R"({"relation":"at most","num_words":4})", "", false},
      {"num_words_per_sentence", R"({"relation":"at least","num_words":3})", "Too short. But this one is fine.",
       false},

      {"number_bold_words", R"({"num_words":2})", "<b>Bold</b> and <b>brave</b>.", true},
      {"number_bold_words", R"({"num_words":2})", "<b>a</b><b>b</b>", true},
      {"number_bold_words", R"({"num_words":1})", "Only <b>one</b> here", true},
      {"number_bold_words", R"({"num_words":2})", "<b>Bold</b> only once.", false},
      {"number_bold_words", R"({"num_words":2})", "<b>two words</b> <b>x</b>", false},
      {"number_bold_words", R"({"num_words":2})", "No bold at all", false},

      {"number_exclamations", R"({"relation":"at most","num_exclamations":2})", "Wow! Great.", true},
      {"number_exclamations", R"({"relation":"at most","num_exclamations":2})", "No exclamations.", true},
      {"number_exclamations", R"({"relation":"exactly","num_exclamations":3})", "Wow!! Yes!", true},
      {"number_exclamations", R"({"relation":"at most","num_exclamations":2})", "Wow! Great! Done!", false},
      {"number_exclamations", R"({"relation":"at least","num_exclamations":2})", "Only one!", false},
      {"number_exclamations", R"({"relation":"exactly","num_exclamations":3})", "Wow!!!!", false},

      {"number_italic_words", R"({"num_words":2})", "_one_ and _two_", true},
      {"number_italic_words", R"({"num_words":2})", "An _italic_ word and _another_.", true},
      {"number_italic_words", R"({"num_words":1})", "Just _this_.", true},
      {"number_italic_words", R"({"num_words":2})", "_one_ only", false},
      {"number_italic_words", R"({"num_words":2})", "_two words_ and _x_", false},
      {"number_italic_words", R"({"num_words":2})", "plain text", false},

      {"number_parentheses", R"({"num_parentheses":2})", "a(b)c", true},
      {"number_parentheses", R"({"num_parentheses":2})", "(aside)", true},
      {"number_parentheses", R"({"num_parentheses":4})", "(a) and (b)", true},
      {"number_parentheses", R"({"num_parentheses":2})", "no parens", false},
      {"number_parentheses", R"({"num_parentheses":2})", "((nested))", false},
      {"number_parentheses", R"({"num_parentheses":2})", "(unclosed", false},

      {"number_parts", R"({"part_splitter":"Part","num_parts":2})", "Part 1\nIntro.\nPart 2\nBody.", true},
      {"number_parts", R"({"part_splitter":"Part","num_parts":2})", "  Part 1: start\nPart 2: end", true},
      {"number_parts", R"({"part_splitter":"PART","num_parts":1})", "PART 1\nEverything.", true},
      {"number_parts", R"({"part_splitter":"Part","num_parts":2})", "Part 1\nOnly one part.", false},
      {"number_parts", R"({"part_splitter":"Part","num_parts":2})", "Part 1\nPart 1\n", false},
      {"number_parts", R"({"part_splitter":"Part","num_parts":2})", "Intro Part 1 and Part 2 inline", false},
      {"number_parts", R"({"part_splitter":"Part","num_parts":2})", "part 1\npart 2", false},

      {"numbered_headers", R"({"num_headers":2})", "1. Intro\ntext\n2. Body\ntext", true},
      {"numbered_headers", R"({"num_headers":2})", "1. A\n2. B", true},
      {"numbered_headers", R"({"num_headers":3})", "1. a\n2. b\n3. c", true},
      {"numbered_headers", R"({"num_headers":2})", "1. Intro\n3. Body", false},
      {"numbered_headers", R"({"num_headers":2})", "1. Only one", false},
      {"numbered_headers", R"({"num_headers":2})", "2. B\n1. A", false},
      {"numbered_headers", R"({"num_headers":2})", "1.Intro\n2.Body", false},

      {"required_sentence", R"({"sentence":"The sky is blue."})", "Look up. The sky is blue. Nice.", true},
      {"required_sentence", R"({"sentence":"The sky is blue."})", "The  sky\nis   blue.", true},
      {"required_sentence", R"({"sentence":"The sky is blue."})", "The sky is blue.", true},
      {"required_sentence", R"({"sentence":"The sky is blue."})", "The sky is Blue.", false},
      {"required_sentence", R"({"sentence":"The sky is blue."})", "the sky is blue.", false},
      {"required_sentence", R"({"sentence":"The sky is blue."})", "The sky is blue", false},

      {"start_checker", R"({"first_sentence":"Hello there."})", "Hello there. How are you?", true},
      {"start_checker", R"({"first_sentence":"Hello there."})", "   Hello there. Indented.", true},
      {"start_checker", R"({"first_sentence":"Hello there."})", "Hello there.", true},
      {"start_checker", R"({"first_sentence":"Hello there."})", "Hi. Hello there.", false},
      {"start_checker", R"({"first_sentence":"Hello there."})", "hello there.", false},
      {"start_checker", R"({"first_sentence":"Hello there."})", "Hello", false},

      {"tldr_summary", "{}", "Body text.\nTL;DR: short summary", true},
      {"tldr_summary", "{}", "Body.\nTL;DR\nThe summary line", true},
      {"tldr_summary", "{}", "TL;DR: all of it", true},
      {"tldr_summary", "{}", "Body.\nTL;DR:", false},
      {"tldr_summary", "{}", "tl;dr: lowercase", false},
      {"tldr_summary", "{}", "TL;DR: at start.\nMore text after.", false},
      {"tldr_summary", "{}", "", false},

      {"variable_placeholder_format", R"({"relation":"at least","num_placeholders":2})",
       "Dear {name}, your {item} shipped.", true},
      {"variable_placeholder_format", R"({"relation":"at least","num_placeholders":2})", "{a}{b}{c}", true},
      {"variable_placeholder_format", R"({"relation":"at most","num_placeholders":1})", "No placeholders", true},
      {"variable_placeholder_format", R"({"relation":"at least","num_placeholders":2})", "Only {one}", false},
      {"variable_placeholder_format", R"({"relation":"at least","num_placeholders":2})", "{} and { }", false},
      {"variable_placeholder_format", R"({"relation":"at most","num_placeholders":1})", "{a} {b}", false},

      {"vowel_capitalization", "{}", "hEllO wOrld", true},
      {"vowel_capitalization", "{}", "rhythm", true},
      {"vowel_capitalization", "{}", "THIS IS LOUD", true},
      {"vowel_capitalization", "{}", "hello", false},
      {"vowel_capitalization", "{}", "HELLO world", false},
      {"vowel_capitalization", "{}", "Apple", false},
  };
  return cases;
}

inline ConstraintSpec golden_spec(const GoldenCase& c) {
  return spec_from_json({{"instruction_id", c.id}, {"kwargs", nlohmann::json::parse(c.kwargs)}});
}

}  // namespace ifpref::testing
