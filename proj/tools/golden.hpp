#pragma once

// Published reference tables reproduced by the experiments. Expansion
// values are of order 4 for Heston and CEV (see README).

#include "kmx/models.hpp"

#include <array>
#include <cmath>

namespace kmx::golden {

inline const models::HestonParams bollerslev{0.1465, 0.5172, 0.5786, -0.0243, 0.0, 0.5172};
inline constexpr double bollerslev_K = 1000.0;
inline constexpr double bollerslev_tau = 1.0 / 12.0;
inline constexpr int heston_order = 4;

struct PriceRow {
    double x;  // spot price (panel A) or spot variance (panel B)
    double ft;
    double km;
    double pct;
};

inline constexpr std::array<PriceRow, 11> heston_prices_a{{
    {950, 57.8425, 57.8449, 0.00418},     {960, 62.3711, 62.3738, 0.0042574},
    {970, 67.1005, 67.1033, 0.0042447},   {980, 72.0291, 72.0321, 0.0041553},
    {990, 77.1553, 77.1584, 0.0040021},   {1000, 82.4766, 82.4797, 0.003797},
    {1010, 87.9903, 87.9934, 0.0035513},  {1020, 93.6933, 93.6964, 0.003275},
    {1030, 99.5822, 99.5852, 0.0029773},  {1040, 105.6532, 105.656, 0.0026663},
    {1050, 111.9021, 111.9048, 0.0023492},
}};

inline constexpr std::array<PriceRow, 11> heston_prices_b{{
    {0.1, 36.4488, 36.4854, 0.10045},     {0.2, 51.4125, 51.4255, 0.025319},
    {0.3, 62.8997, 62.9068, 0.011276},    {0.4, 72.5792, 72.5838, 0.0063472},
    {0.5, 81.1007, 81.104, 0.0040628},    {0.6, 88.7981, 88.8006, 0.002821},
    {0.7, 95.8702, 95.8721, 0.002072},    {0.8, 102.4465, 102.4481, 0.0015857},
    {0.9, 108.6171, 108.6184, 0.0012524}, {1.0, 114.4477, 114.4488, 0.001014},
    {1.1, 119.9878, 119.9888, 0.00083766},
}};

// Greeks: delta and gamma in percent, vega absolute; diff = ft - km.
struct GreekRow {
    double x;
    double ft;
    double km;
    double diff;
};

inline constexpr std::array<GreekRow, 11> heston_delta_a{{
    {950, 44.2794, 44.2819, -0.0025864}, {960, 46.2918, 46.294, -0.0021588},  {970, 48.2928, 48.2945, -0.0016931},
    {980, 50.2776, 50.2788, -0.001201},  {990, 52.2414, 52.2421, -0.00069418}, {1000, 54.18, 54.1801, -0.00018398},
    {1010, 56.0893, 56.089, 0.00031874}, {1020, 57.9657, 57.9649, 0.00080396}, {1030, 59.8058, 59.8046, 0.0012626},
    {1040, 61.6066, 61.6049, 0.0016869}, {1050, 63.3654, 63.3633, 0.00207},
}};

inline constexpr std::array<GreekRow, 11> heston_delta_b{{
    {0.1, 51.9512, 51.9516, -0.00044321}, {0.2, 52.6614, 52.6509, 0.010469},  {0.3, 53.2189, 53.2149, 0.0040575},
    {0.4, 53.6929, 53.6917, 0.0012105},   {0.5, 54.1121, 54.1121, 0.0000348}, {0.6, 54.492, 54.4932, -0.0012002},
    {0.7, 54.8416, 54.8419, -0.00021102}, {0.8, 55.1673, 55.1588, 0.0085098}, {0.9, 55.4732, 55.4419, 0.031343},
    {1.0, 55.7625, 55.69, 0.072555},      {1.1, 56.0376, 55.9066, 0.13101},
}};

inline constexpr std::array<GreekRow, 11> heston_gamma_a{{
    {950, 0.20165, 0.20161, 4.0526e-05},  {960, 0.20076, 0.20071, 4.4782e-05},  {970, 0.19937, 0.19932, 4.8141e-05},
    {980, 0.1975, 0.19745, 5.0149e-05},   {990, 0.19519, 0.19514, 5.0908e-05},  {1000, 0.19246, 0.19241, 5.0701e-05},
    {1010, 0.18935, 0.1893, 4.9582e-05},  {1020, 0.18588, 0.18583, 4.7187e-05}, {1030, 0.18209, 0.18205, 4.4327e-05},
    {1040, 0.17802, 0.17798, 4.0407e-05}, {1050, 0.1737, 0.17366, 3.6158e-05},
}};

inline constexpr std::array<GreekRow, 11> heston_gamma_b{{
    {0.1, 0.44642, 0.38533, 0.061096},    {0.2, 0.31234, 0.30392, 0.0084156},   {0.3, 0.25395, 0.25273, 0.0012173},
    {0.4, 0.21935, 0.21918, 0.0001669},   {0.5, 0.1958, 0.19575, 5.1236e-05},   {0.6, 0.17844, 0.17843, 1.3833e-05},
    {0.7, 0.16496, 0.1652, -0.00023702},  {0.8, 0.15409, 0.15448, -0.00038083}, {0.9, 0.14509, 0.1436, 0.0014905},
    {1.0, 0.13748, 0.1273, 0.010179},     {1.1, 0.13092, 0.096136, 0.034784},
}};

inline constexpr std::array<GreekRow, 11> heston_vega_a{{
    {950, 74.9687, 74.9679, 0.00076581},  {960, 76.221, 76.2212, -0.00023367}, {970, 77.2834, 77.2847, -0.0013377},
    {980, 78.1538, 78.1563, -0.0025286},  {990, 78.8316, 78.8354, -0.0037851}, {1000, 79.3178, 79.3229, -0.005083},
    {1010, 79.6148, 79.6212, -0.0063961}, {1020, 79.7259, 79.7336, -0.0076966}, {1030, 79.6561, 79.6651, -0.0089566},
    {1040, 79.4111, 79.4213, -0.010148},  {1050, 78.9977, 79.0090, -0.0112},
}};

inline constexpr std::array<GreekRow, 11> heston_vega_b{{
    {0.1, 180.4329, 151.6085, 28.8244}, {0.2, 127.7884, 122.9584, 4.8299}, {0.3, 104.3134, 103.4803, 0.83308},
    {0.4, 90.279, 90.1519, 0.12705},    {0.5, 80.6826, 80.6861, -0.0035699}, {0.6, 73.5874, 73.5304, 0.056988},
    {0.7, 68.0654, 67.8674, 0.19792},   {0.8, 63.6084, 63.6146, -0.0061472}, {0.9, 59.9122, 61.4241, -1.512},
    {1.0, 56.7816, 62.6834, -5.9018},   {1.1, 54.0853, 69.5145, -15.4293},
}};

struct McRow {
    double x;
    double mc;
    double lo;
    double hi;
    double km;
    double pct;
};

inline constexpr std::array<McRow, 11> cev06_a{{
    {950, 58.178, 56.5888, 59.7672, 57.8674, -0.53393},      {960, 62.7283, 61.0752, 64.3814, 62.3967, -0.52869},
    {970, 67.4865, 65.7693, 69.2036, 67.1266, -0.5333},      {980, 72.4486, 70.6673, 74.2298, 72.0555, -0.54255},
    {990, 77.6149, 75.7696, 79.4602, 77.1817, -0.55814},     {1000, 82.9715, 81.0622, 84.8809, 82.5029, -0.56483},
    {1010, 88.5223, 86.5491, 90.4955, 88.0163, -0.57164},    {1020, 94.2615, 92.2246, 96.2983, 93.7188, -0.57575},
    {1030, 100.1746, 98.0743, 102.2748, 99.6069, -0.56664},  {1040, 106.2693, 104.106, 108.4326, 105.677, -0.55739},
    {1050, 112.5434, 110.3175, 114.7693, 111.9249, -0.54959},
}};

inline constexpr std::array<McRow, 11> cev06_b{{
    {0.1, 36.7795, 35.9868, 37.5721, 36.6167, -0.44249},     {0.2, 51.7656, 50.6285, 52.9026, 51.5021, -0.50903},
    {0.3, 63.2958, 61.8824, 64.7093, 62.9573, -0.53486},     {0.4, 73.0207, 71.3661, 74.6754, 72.6188, -0.55043},
    {0.5, 81.5878, 79.7144, 83.4613, 81.1286, -0.56283},     {0.6, 89.3302, 87.2538, 91.4066, 88.8177, -0.57367},
    {0.7, 96.4461, 94.1786, 98.7137, 95.8836, -0.58329},     {0.8, 103.0649, 100.6155, 105.5143, 102.455, -0.59176},
    {0.9, 109.2765, 106.6527, 111.9003, 108.6217, -0.59925}, {1.0, 115.1459, 112.3539, 117.9379, 114.449, -0.60525},
    {1.1, 120.7237, 117.7688, 123.6786, 119.9864, -0.61074},
}};

inline constexpr std::array<McRow, 11> cev133_a{{
    {950, 57.7911, 56.2022, 59.3801, 57.9685, 0.30688},      {960, 62.2887, 60.6359, 63.9416, 62.4995, 0.33837},
    {970, 66.974, 65.257, 68.6911, 67.2303, 0.38266},        {980, 71.8629, 70.0816, 73.6442, 72.1595, 0.4128},
    {990, 76.9577, 75.1121, 78.8032, 77.2853, 0.42574},      {1000, 82.2442, 80.3345, 84.1539, 82.6053, 0.43906},
    {1010, 87.7206, 85.7469, 89.6943, 88.1168, 0.45168},     {1020, 93.3737, 91.3361, 95.4113, 93.8168, 0.47455},
    {1030, 99.2136, 97.1124, 101.3148, 99.7018, 0.49215},    {1040, 105.2331, 103.0687, 107.3975, 105.7682, 0.50848},
    {1050, 111.4358, 109.2087, 113.6629, 112.0119, 0.51693},
}};

inline constexpr std::array<McRow, 11> cev133_b{{
    {0.1, 36.6629, 35.8701, 37.4558, 36.8541, 0.52153},      {0.2, 51.4396, 50.3018, 52.5775, 51.6922, 0.49096},
    {0.3, 62.818, 61.4036, 64.2324, 63.1147, 0.47232},       {0.4, 72.4188, 70.7634, 74.0743, 72.7493, 0.45633},
    {0.5, 80.8778, 79.0039, 82.7517, 81.235, 0.44158},       {0.6, 88.5227, 86.4464, 90.5991, 88.9015, 0.42796},
    {0.7, 95.5489, 93.2821, 97.8157, 95.9457, 0.41536},      {0.8, 102.0848, 99.6369, 104.5326, 102.4961, 0.40293},
    {0.9, 108.2186, 105.5973, 110.8399, 108.642, 0.39128},   {1.0, 114.0145, 111.2261, 116.8029, 114.4488, 0.38094},
    {1.1, 119.5232, 116.573, 122.4734, 119.9658, 0.37029},
}};

// Schobel-Zhu set used for the greek and convergence studies.
inline const models::SzParams sz_params{4.0, 0.2, 0.1, -0.5, 0.0953, 0.2};
inline constexpr double sz_K = 100.0;
inline constexpr double sz_tau = 0.25;
inline constexpr int sz_order = 5;

inline constexpr std::array<GreekRow, 9> sz_delta_a{{
    {80, 1.5781, 1.9609, -0.38278},  {85, 7.6057, 8.6632, -1.0575},    {90, 22.6168, 22.4057, 0.21117},
    {95, 44.2531, 42.1098, 2.1433},  {100, 64.6821, 62.9238, 1.7583},  {105, 79.5248, 79.2665, 0.2583},
    {110, 88.791, 89.2885, -0.4975}, {115, 94.0791, 94.6592, -0.58008}, {120, 96.9379, 97.473, -0.53503},
}};

inline constexpr std::array<GreekRow, 11> sz_vega_b{{
    {0.1, 10.438, 11.2173, -0.77928},
    {0.2, 11.6291, 11.2967, 0.33233},
    {0.3, 12.1307, 87.6963, -75.5656},
    {0.4, 12.3724, -1048.4084, 1060.7808},
    {0.5, 12.4988, -35868.8908, 35881.3896},
    {0.6, 12.5661, -372544.5672, 372557.1333},
    {0.7, 12.5994, -2388099.2386, 2388111.8381},
    {0.8, 12.6113, -11380315.5007, 11380328.112},
    {0.9, 12.6084, -44060486.9252, 44060499.5336},
    {1.0, 12.5946, -145970936.3363, 145970948.931},
    {1.1, 12.5724, -428003736.4368, 428003749.0092},
}};

// Stein-Stein (rho = 0) maximum errors over S in [80, 120] at tau = 0.25.
inline constexpr double ss_max_err_n4 = 0.6458;
inline constexpr double ss_max_err_n5 = 1.1282;

// Commodity futures set.
inline constexpr double lutz_S = 80.0;
inline constexpr double lutz_Sbar = 85.0;
inline models::CommodityParams lutz_params() { return {1.0, std::log(lutz_Sbar), 1.0, 0.05, 0.2, -0.5, 0.04}; }
inline constexpr double lutz_mc_T05 = 81.8091;
inline constexpr double lutz_mc_T05_lo = 81.7681;
inline constexpr double lutz_mc_T05_hi = 81.8500;
inline constexpr double lutz_analytic_T05 = 81.8008;
inline constexpr double lutz_err_n0_T05 = 0.2387;
inline constexpr double lutz_err_n1_T05 = 0.4131;
inline constexpr double lutz_err_n0_T1 = 0.6856;
inline constexpr double lutz_err_n4_T1 = 0.9521;

}  // namespace kmx::golden
