#pragma once

#include "gdiss/errors.hpp"
#include "gdiss/linalg.hpp"
#include "gdiss/states.hpp"
#include "gdiss/synthesis.hpp"
#include "gdiss/nullifier.hpp"
#include "gdiss/presets.hpp"
#include "gdiss/dynamics.hpp"
#include "gdiss/memory.hpp"
#include "gdiss/problem.hpp"
#include "gdiss/cli.hpp"
