#pragma once

#include "isac/error.hpp"
#include "isac/frontier.hpp"
#include "isac/infomeasures.hpp"
#include "isac/io.hpp"
#include "isac/model.hpp"
#include "isac/sensing.hpp"
#include "isac/simulator.hpp"
#include "isac/typeclasses.hpp"
