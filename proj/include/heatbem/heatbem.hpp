/*
 *   Copyright 2026 The heatbem Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#ifndef HEATBEM_HEATBEM_HPP
#define HEATBEM_HEATBEM_HPP

#include "heatbem/assembly.hpp"
#include "heatbem/block_toeplitz.hpp"
#include "heatbem/errors.hpp"
#include "heatbem/field.hpp"
#include "heatbem/kernels.hpp"
#include "heatbem/mesh.hpp"
#include "heatbem/oracle.hpp"
#include "heatbem/parallel.hpp"
#include "heatbem/quadrature.hpp"
#include "heatbem/solver.hpp"
#include "heatbem/study.hpp"
#include "heatbem/vec3.hpp"
#include "heatbem/verify.hpp"

#endif // HEATBEM_HEATBEM_HPP
