// Copyright 2026 The ctcx Authors. All Rights Reserved.
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

#include <cstddef>
#include <functional>

namespace ctcx {

// Worker cap: CTCX_THREADS when set to a positive integer, otherwise the
// hardware concurrency (at least 1).
int worker_threads();

// Runs fn(i) for i in [0, n) on up to `threads` threads. Callers write
// results into per-index slots so output order never depends on scheduling.
// The first exception thrown by any task is rethrown after all finish.
void parallel_for(size_t n, int threads, const std::function<void(size_t)>& fn);

}  // namespace ctcx
