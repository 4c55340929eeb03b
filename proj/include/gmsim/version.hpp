#pragma once

#define GMSIM_VERSION "0.1.0"
