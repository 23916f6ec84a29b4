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

#include <string>
#include <string_view>

namespace driftva {
namespace detail {

// Classic five-step Porter suffix stripper (the original 1980 rule set, no
// later revisions). State follows the reference implementation: b is the
// word buffer, k the index of its last letter, j the end of the stem left
// after a candidate suffix has been matched.
class PorterState {
 public:
  explicit PorterState(std::string word) : b_(std::move(word)), k_(static_cast<int>(b_.size()) - 1) {}

  std::string run() {
    if (k_ <= 1) return b_;  // length <= 2: leave untouched
    step1ab();
    step1c();
    step2();
    step3();
    step4();
    step5();
    b_.resize(static_cast<size_t>(k_) + 1);
    return b_;
  }

 private:
  // cons(i): true unless b[i] is a,e,i,o,u, or a y preceded by a consonant.
  bool cons(int i) const {
    switch (b_[static_cast<size_t>(i)]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;  // non-letters (digits, '.', '-') count as consonants
    }
  }

  // m(): number of VC sequences in b[0..j].
  int measure() const {
    int n = 0;
    int i = 0;
    for (;;) {
      if (i > j_) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    for (;;) {
      for (;;) {
        if (i > j_) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      for (;;) {
        if (i > j_) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool vowel_in_stem() const {
    for (int i = 0; i <= j_; ++i) {
      if (!cons(i)) return true;
    }
    return false;
  }

  bool doublec(int i) const {
    if (i < 1) return false;
    if (b_[static_cast<size_t>(i)] != b_[static_cast<size_t>(i - 1)]) return false;
    return cons(i);
  }

  // cvc(i): b[i-2..i] is consonant-vowel-consonant and the final consonant
  // is not w, x or y. Signals stems like "hop" that restore a final e.
  bool cvc(int i) const {
    if (i < 2 || !cons(i) || cons(i - 1) || !cons(i - 2)) return false;
    char ch = b_[static_cast<size_t>(i)];
    return ch != 'w' && ch != 'x' && ch != 'y';
  }

  bool ends(std::string_view s) {
    int len = static_cast<int>(s.size());
    if (len > k_ + 1) return false;
    if (b_.compare(static_cast<size_t>(k_ - len + 1), static_cast<size_t>(len), s) != 0) return false;
    j_ = k_ - len;
    return true;
  }

  void set_to(std::string_view s) {
    b_.resize(static_cast<size_t>(j_) + 1);
    b_.append(s);
    k_ = j_ + static_cast<int>(s.size());
  }

  void replace_if_m_positive(std::string_view s) {
    if (measure() > 0) set_to(s);
  }

  void step1ab() {
    if (b_[static_cast<size_t>(k_)] == 's') {
      if (ends("sses")) {
        k_ -= 2;
      } else if (ends("ies")) {
        set_to("i");
      } else if (b_[static_cast<size_t>(k_ - 1)] != 's') {
        --k_;
      }
    }
    if (ends("eed")) {
      if (measure() > 0) --k_;
    } else if ((ends("ed") || ends("ing")) && vowel_in_stem()) {
      k_ = j_;
      if (ends("at")) {
        set_to("ate");
      } else if (ends("bl")) {
        set_to("ble");
      } else if (ends("iz")) {
        set_to("ize");
      } else if (doublec(k_)) {
        --k_;
        char ch = b_[static_cast<size_t>(k_)];
        if (ch == 'l' || ch == 's' || ch == 'z') ++k_;
      } else {
        j_ = k_;
        if (measure() == 1 && cvc(k_)) set_to("e");
      }
    }
  }

  void step1c() {
    if (ends("y") && vowel_in_stem()) b_[static_cast<size_t>(k_)] = 'i';
  }

  // Steps 2-4 dispatch on a fixed letter the way the reference code does;
  // within a group the first (longest) matching suffix wins and a failed m()
  // condition does not fall through to shorter suffixes.
  void step2() {
    if (k_ < 1) return;
    switch (b_[static_cast<size_t>(k_ - 1)]) {
      case 'a':
        if (ends("ational")) { replace_if_m_positive("ate"); break; }
        if (ends("tional")) { replace_if_m_positive("tion"); break; }
        break;
      case 'c':
        if (ends("enci")) { replace_if_m_positive("ence"); break; }
        if (ends("anci")) { replace_if_m_positive("ance"); break; }
        break;
      case 'e':
        if (ends("izer")) { replace_if_m_positive("ize"); break; }
        break;
      case 'l':
        if (ends("abli")) { replace_if_m_positive("able"); break; }
        if (ends("alli")) { replace_if_m_positive("al"); break; }
        if (ends("entli")) { replace_if_m_positive("ent"); break; }
        if (ends("eli")) { replace_if_m_positive("e"); break; }
        if (ends("ousli")) { replace_if_m_positive("ous"); break; }
        break;
      case 'o':
        if (ends("ization")) { replace_if_m_positive("ize"); break; }
        if (ends("ation")) { replace_if_m_positive("ate"); break; }
        if (ends("ator")) { replace_if_m_positive("ate"); break; }
        break;
      case 's':
        if (ends("alism")) { replace_if_m_positive("al"); break; }
        if (ends("iveness")) { replace_if_m_positive("ive"); break; }
        if (ends("fulness")) { replace_if_m_positive("ful"); break; }
        if (ends("ousness")) { replace_if_m_positive("ous"); break; }
        break;
      case 't':
        if (ends("aliti")) { replace_if_m_positive("al"); break; }
        if (ends("iviti")) { replace_if_m_positive("ive"); break; }
        if (ends("biliti")) { replace_if_m_positive("ble"); break; }
        break;
      default:
        break;
    }
  }

  void step3() {
    switch (b_[static_cast<size_t>(k_)]) {
      case 'e':
        if (ends("icate")) { replace_if_m_positive("ic"); break; }
        if (ends("ative")) { replace_if_m_positive(""); break; }
        if (ends("alize")) { replace_if_m_positive("al"); break; }
        break;
      case 'i':
        if (ends("iciti")) { replace_if_m_positive("ic"); break; }
        break;
      case 'l':
        if (ends("ical")) { replace_if_m_positive("ic"); break; }
        if (ends("ful")) { replace_if_m_positive(""); break; }
        break;
      case 's':
        if (ends("ness")) { replace_if_m_positive(""); break; }
        break;
      default:
        break;
    }
  }

  void step4() {
    if (k_ < 1) return;
    switch (b_[static_cast<size_t>(k_ - 1)]) {
      case 'a':
        if (ends("al")) break;
        return;
      case 'c':
        if (ends("ance")) break;
        if (ends("ence")) break;
        return;
      case 'e':
        if (ends("er")) break;
        return;
      case 'i':
        if (ends("ic")) break;
        return;
      case 'l':
        if (ends("able")) break;
        if (ends("ible")) break;
        return;
      case 'n':
        if (ends("ant")) break;
        if (ends("ement")) break;
        if (ends("ment")) break;
        if (ends("ent")) break;
        return;
      case 'o':
        if (ends("ion") && j_ >= 0 &&
            (b_[static_cast<size_t>(j_)] == 's' || b_[static_cast<size_t>(j_)] == 't')) {
          break;
        }
        if (ends("ou")) break;
        return;
      case 's':
        if (ends("ism")) break;
        return;
      case 't':
        if (ends("ate")) break;
        if (ends("iti")) break;
        return;
      case 'u':
        if (ends("ous")) break;
        return;
      case 'v':
        if (ends("ive")) break;
        return;
      case 'z':
        if (ends("ize")) break;
        return;
      default:
        return;
    }
    if (measure() > 1) k_ = j_;
  }

  void step5() {
    j_ = k_;
    if (b_[static_cast<size_t>(k_)] == 'e') {
      int a = measure();
      if (a > 1 || (a == 1 && !cvc(k_ - 1))) --k_;
    }
    if (b_[static_cast<size_t>(k_)] == 'l' && doublec(k_) && measure() > 1) --k_;
  }

  std::string b_;
  int k_;
  int j_ = 0;
};

}  // namespace detail

/// Stem one lowercase token with the original Porter algorithm. Words of
/// length <= 2 and tokens with embedded punctuation pass through mostly
/// untouched (non-letters behave as consonants, as in the reference code).
inline std::string porter_stem(std::string_view token) {
  return detail::PorterState(std::string(token)).run();
}

}  // namespace driftva
