#pragma once

#include "scgt/bounds.hpp"
#include "scgt/error.hpp"
#include "scgt/family.hpp"
#include "scgt/geometry.hpp"
#include "scgt/linalg.hpp"
#include "scgt/oracle.hpp"
#include "scgt/quantum.hpp"
#include "scgt/sld.hpp"
#include "scgt/tensors.hpp"
#include "scgt/unitary.hpp"
