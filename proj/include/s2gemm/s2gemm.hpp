#pragma once

#include "s2gemm/elem_type.hpp"
#include "s2gemm/engine.hpp"
#include "s2gemm/matrix.hpp"
#include "s2gemm/matrix_io.hpp"
#include "s2gemm/microkernel.hpp"
#include "s2gemm/perfmodel.hpp"
#include "s2gemm/reference.hpp"
#include "s2gemm/schedule.hpp"
#include "s2gemm/systolic.hpp"
