// parallel.h
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
//
// Copyright 2026 The persel Authors. All Rights Reserved.

#ifndef PERSEL_PARALLEL_H_
#define PERSEL_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace persel {

// Resolves a requested worker count: a positive value is used as is, zero
// means one worker per hardware thread.
int ResolveThreads(int requested);

// Runs fn(i) for every i in [0, n) on up to `threads` workers (0 = auto).
// Each index is visited exactly once; callers write results into
// index-addressed slots so the outcome does not depend on scheduling. If any
// call throws, every index still runs and the exception from the lowest
// failing index is rethrown, so the reported error is schedule-independent.
void ParallelFor(std::size_t n, int threads,
                 const std::function<void(std::size_t)> &fn);

}  // namespace persel

#endif  // PERSEL_PARALLEL_H_
