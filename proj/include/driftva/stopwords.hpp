// Copyright 2026 The driftva Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <string_view>

namespace driftva {

// Frozen English stop-word list: the union of the two stock lists most NLP
// toolkits ship. Pinned here (and mirrored in data/stopwords.txt) so results
// do not drift with library versions. Matching happens on surface tokens
// before stemming, so contractions appear in their apostrophe forms.
inline constexpr std::array<std::string_view, 378> kBuiltinStopWords = {
    "a", "about", "above", "across", "after", "afterwards", "again", "against",
    "ain", "all", "almost", "alone", "along", "already", "also", "although",
    "always", "am", "among", "amongst", "amoungst", "amount", "an", "and",
    "another", "any", "anyhow", "anyone", "anything", "anyway", "anywhere",
    "are", "aren", "aren't", "around", "as", "at", "back", "be", "became",
    "because", "become", "becomes", "becoming", "been", "before", "beforehand",
    "behind", "being", "below", "beside", "besides", "between", "beyond",
    "bill", "both", "bottom", "but", "by", "call", "can", "cannot", "cant",
    "co", "con", "could", "couldn", "couldn't", "couldnt", "cry", "d", "de",
    "describe", "detail", "did", "didn", "didn't", "do", "does", "doesn",
    "doesn't", "doing", "don", "don't", "done", "down", "due", "during",
    "each", "eg", "eight", "either", "eleven", "else", "elsewhere", "empty",
    "enough", "etc", "even", "ever", "every", "everyone", "everything",
    "everywhere", "except", "few", "fifteen", "fifty", "fill", "find", "fire",
    "first", "five", "for", "former", "formerly", "forty", "found", "four",
    "from", "front", "full", "further", "get", "give", "go", "had", "hadn",
    "hadn't", "has", "hasn", "hasn't", "hasnt", "have", "haven", "haven't",
    "having", "he", "hence", "her", "here", "hereafter", "hereby", "herein",
    "hereupon", "hers", "herself", "him", "himself", "his", "how", "however",
    "hundred", "i", "ie", "if", "in", "inc", "indeed", "interest", "into",
    "is", "isn", "isn't", "it", "it's", "its", "itself", "just", "keep",
    "last", "latter", "latterly", "least", "less", "ll", "ltd", "m", "ma",
    "made", "many", "may", "me", "meanwhile", "might", "mightn", "mightn't",
    "mill", "mine", "more", "moreover", "most", "mostly", "move", "much",
    "must", "mustn", "mustn't", "my", "myself", "name", "namely", "needn",
    "needn't", "neither", "never", "nevertheless", "next", "nine", "no",
    "nobody", "none", "noone", "nor", "not", "nothing", "now", "nowhere", "o",
    "of", "off", "often", "on", "once", "one", "only", "onto", "or", "other",
    "others", "otherwise", "our", "ours", "ourselves", "out", "over", "own",
    "part", "per", "perhaps", "please", "put", "rather", "re", "s", "same",
    "see", "seem", "seemed", "seeming", "seems", "serious", "several", "shan",
    "shan't", "she", "she's", "should", "should've", "shouldn", "shouldn't",
    "show", "side", "since", "sincere", "six", "sixty", "so", "some",
    "somehow", "someone", "something", "sometime", "sometimes", "somewhere",
    "still", "such", "system", "t", "take", "ten", "than", "that", "that'll",
    "the", "their", "theirs", "them", "themselves", "then", "thence", "there",
    "thereafter", "thereby", "therefore", "therein", "thereupon", "these",
    "they", "thick", "thin", "third", "this", "those", "though", "three",
    "through", "throughout", "thru", "thus", "to", "together", "too", "top",
    "toward", "towards", "twelve", "twenty", "two", "un", "under", "until",
    "up", "upon", "us", "ve", "very", "via", "was", "wasn", "wasn't", "we",
    "well", "were", "weren", "weren't", "what", "whatever", "when", "whence",
    "whenever", "where", "whereafter", "whereas", "whereby", "wherein",
    "whereupon", "wherever", "whether", "which", "while", "whither", "who",
    "whoever", "whole", "whom", "whose", "why", "will", "with", "within",
    "without", "won", "won't", "would", "wouldn", "wouldn't", "y", "yet",
    "you", "you'd", "you'll", "you're", "you've", "your", "yours", "yourself",
    "yourselves",
};

}  // namespace driftva
