#pragma once

#include "spinglue/error.hpp"
#include "spinglue/triangulation.hpp"
#include "spinglue/geometry.hpp"
#include "spinglue/gluing.hpp"
#include "spinglue/fundamental_group.hpp"
#include "spinglue/spinning.hpp"
#include "spinglue/holonomy.hpp"
