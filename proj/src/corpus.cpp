/*
 * Copyright 2026 The dcmem Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <string>
#include <utility>
#include <vector>

#include "dc/script.hpp"

namespace dc::script {

const std::vector<std::pair<std::string, std::string>>& builtins() {
  static const std::vector<std::pair<std::string, std::string>> kCorpus = {
      {"swap", R"(# Parallel assignment: two children swap x and y between a fork and a join.
GLOBAL x 1
GLOBAL y 2
THREAD 0
RELSET 1:1,2:1
ACQSET 1:2,2:2
THREAD 1
ACQ 0 1
READ y a
WRITE x a
REL 0 2
THREAD 2
ACQ 0 1
READ x b
WRITE y b
REL 0 2
)"},
      {"swap-sc-witness", R"(# Two peers swap x and y; thread 1 hands its result to thread 0.
GLOBAL x 1
GLOBAL y 2
THREAD 0
READ y a
WRITE x a
ACQ 1 1
THREAD 1
READ x b
WRITE y b
REL 0 1
)"},
      {"single", R"(GLOBAL x 3
THREAD 0
READ x a
WRITE x a*a+1
ALLOC p
WRITE @p max(a,7)
)"},
      {"chain", R"(# Transitive propagation: 0 -> 1 -> 2 -> 0. Thread 1 forwards without writing.
GLOBAL x 0
GLOBAL y 0
THREAD 0
WRITE x 5
REL 1 1
ACQ 2 2
THREAD 1
ACQ 0 1
REL 2 1
THREAD 2
ACQ 1 2
READ x r
WRITE y r
REL 0 2
)"},
      {"fig2", R"(# Three threads with labeled, matched pairs and disjoint writes.
GLOBAL a 0
GLOBAL b 0
GLOBAL c 0
THREAD 0
WRITE a 1
REL 1 1
ACQ 2 2
READ c r
WRITE a r+10
THREAD 1
ACQ 0 1
READ a v
WRITE b v+1
REL 2 1
THREAD 2
ACQ 1 2
READ b w
WRITE c w*2
REL 0 2
)"},
      {"overwrite", R"(# A write handed over and overwritten along a causal chain is not a race.
GLOBAL a 0
THREAD 0
WRITE a 1
REL 1 1
ACQ 1 2
READ a r
WRITE a r+100
THREAD 1
ACQ 0 1
READ a s
WRITE a s+1
REL 0 2
)"},
      {"isolation", R"(# Neither peer sees the other's write before synchronizing.
GLOBAL x 0
GLOBAL y 0
GLOBAL seen0 -1
GLOBAL seen1 -1
THREAD 0
WRITE x 1
READ y a
WRITE seen0 a
ACQ 1 1
THREAD 1
WRITE y 1
READ x b
WRITE seen1 b
REL 0 1
)"},
      {"alloc", R"(# A cell allocated by thread 1 reaches thread 0 through a release.
GLOBAL x 0
THREAD 0
ACQ 1 1
READ x r
WRITE x r+1
THREAD 1
ALLOC p
WRITE @p 7
ALLOC q
WRITE x 3
REL 0 1
)"},
      {"barrier", R"(# Two-thread barrier (broadcast release, then acquire). Each thread
# peeks at the other's cell before the barrier.
GLOBAL x 0
GLOBAL y 0
GLOBAL s 0
THREAD 0
WRITE x 1
READ y p
REL 1 2
ACQ 1 1
READ y a
WRITE s a+p*10
THREAD 1
WRITE y 2
READ x q
REL 0 2
ACQ 0 1
READ x b
WRITE y b+q+2
)"},
      {"broadcast", R"(# One broadcast release to two acquirers, merged back with one acquire set.
GLOBAL a 0
GLOBAL b 0
GLOBAL c 4
THREAD 0
WRITE c 5
RELSET 1:1,2:1
ACQSET 1:2,2:2
THREAD 1
ACQ 0 1
READ c v
WRITE a v+1
REL 0 2
THREAD 2
ACQ 0 1
READ c w
WRITE b w*3
REL 0 2
)"},
      {"race", R"(# Both children write x between fork and join.
GLOBAL x 0
THREAD 0
RELSET 1:1,2:1
ACQSET 1:2,2:2
THREAD 1
ACQ 0 1
WRITE x 1
REL 0 2
THREAD 2
ACQ 0 1
WRITE x 2
REL 0 2
)"},
      {"race-local", R"(# The acquirer itself wrote the cell concurrently with its partner.
GLOBAL x 0
GLOBAL y 0
THREAD 0
WRITE x 1
WRITE y 1
ACQ 1 1
THREAD 1
WRITE x 2
REL 0 1
)"},
      {"crossed-acquire", R"(# Each thread waits for a release the other issues only afterwards.
GLOBAL x 0
THREAD 0
ACQ 1 2
WRITE x 1
REL 1 1
THREAD 1
ACQ 0 2
WRITE x 2
REL 0 1
)"},
      {"missing-release", R"(# Thread 0 waits for a release thread 1 never issues.
GLOBAL x 0
THREAD 0
ACQ 1 1
READ x r
THREAD 1
WRITE x 1
)"},
      {"double-release", R"(# Two releases name the same acquire (2,1).
GLOBAL x 0
THREAD 0
WRITE x 1
REL 2 1
THREAD 1
WRITE x 2
REL 2 1
THREAD 2
ACQ 0 1
READ x a
)"},
      {"diamond", R"(# Four threads: fork to two workers, merge at a third, report to the root.
GLOBAL a 0
GLOBAL b 0
GLOBAL s 0
THREAD 0
RELSET 1:1,2:1
ACQ 3 2
READ s r
WRITE s r*10
THREAD 1
ACQ 0 1
WRITE a 3
REL 3 1
THREAD 2
ACQ 0 1
WRITE b 4
REL 3 1
THREAD 3
ACQSET 1:2,2:2
READ a x
READ b y
WRITE s x+y
REL 0 2
)"},
      {"diamond-race", R"(# Two workers write the same cell; the merge point sees both.
GLOBAL a 0
THREAD 0
RELSET 1:1,2:1
THREAD 1
ACQ 0 1
WRITE a 3
REL 3 1
THREAD 2
ACQ 0 1
WRITE a 4
REL 3 1
THREAD 3
ACQSET 1:2,2:2
READ a x
)"},
  };
  return kCorpus;
}

const std::string* find_builtin(std::string_view name) {
  for (const auto& [n, text] : builtins()) {
    if (n == name) return &text;
  }
  return nullptr;
}

}  // namespace dc::script
