#pragma once

#include "mprp/baseline.hpp"
#include "mprp/discretize.hpp"
#include "mprp/generate.hpp"
#include "mprp/io.hpp"
#include "mprp/model.hpp"
#include "mprp/oracle.hpp"
#include "mprp/reassign.hpp"
#include "mprp/validate.hpp"
