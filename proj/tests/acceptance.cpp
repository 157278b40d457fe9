// Copyright 2026 The bapred Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <iostream>

#include "bapred/harness/acceptance.hpp"

int main() {
    bapred::AcceptanceSuite suite(std::cout, bapred::default_workers());
    int failed = 0;
    for (const auto& c : suite.run_all()) failed += c.pass ? 0 : 1;
    std::cout << (failed == 0 ? "all acceptance criteria passed" : std::to_string(failed) + " acceptance criteria failed")
              << '\n';
    return failed == 0 ? 0 : 1;
}
