#pragma once

#include "twomode/errors.hpp"
#include "twomode/model.hpp"
#include "twomode/dynamics.hpp"
#include "twomode/entanglement.hpp"
#include "twomode/config.hpp"
#include "twomode/commands.hpp"
