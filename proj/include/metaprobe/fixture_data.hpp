#pragma once

// Tables transcribed from the published prompt examples. The Study 15573
// empo_3 column is filled in from the published per-label counts; the prompt
// example shows it masked.

#include <string_view>

namespace metaprobe::fixtures {

inline constexpr std::string_view kStudy1728 = R"tbl(env_material env_biome env_feature sample_type scientific_name empo_3
0 water desert biome road water filter freshwater metagenome Aqueous (non-saline)
1 water desert biome road water filter freshwater metagenome Aqueous (non-saline)
2 soil desert biome road soil soil metagenome Solid (non-saline)
3 anthropogenic environmental material desert biome road asphalt outdoor metagenome Solid (non-saline)
4 anthropogenic environmental material desert biome road asphalt outdoor metagenome Solid (non-saline)
5 anthropogenic environmental material desert biome road asphalt outdoor metagenome Solid (non-saline)
6 anthropogenic environmental material desert biome road asphalt outdoor metagenome Solid (non-saline)
7 water desert biome road water and LB broth freshwater metagenome Aqueous (non-saline)
8 soil desert biome road soil soil metagenome Solid (non-saline)
9 water desert biome road water and LB broth freshwater metagenome Aqueous (non-saline)
10 anthropogenic environmental material desert biome road asphalt outdoor metagenome Solid (non-saline)
11 anthropogenic environmental material desert biome road asphalt outdoor metagenome Solid (non-saline)
12 water desert biome road water and LB broth freshwater metagenome Aqueous (non-saline)
13 anthropogenic environmental material desert biome road asphalt outdoor metagenome Solid (non-saline)
14 anthropogenic environmental material desert biome road asphalt outdoor metagenome Solid (non-saline)
15 water desert biome road water filter freshwater metagenome Aqueous (non-saline)
16 water desert biome road water filter freshwater metagenome Aqueous (non-saline)
)tbl";

inline constexpr std::string_view kStudy15573 = R"tbl(env_material env_biome env_feature sample_type scientific_name geo_loc_name empo_3
0 organic material marine biome coral reef Turf Algae algae metagenome US Virgin Islands Plant (saline)
1 organic material marine biome animal-associated habitat coral coral metagenome Aruba Animal (saline)
2 organic material marine biome animal-associated habitat coral coral metagenome US Virgin Islands Animal (saline)
3 organic material marine biome plant-associated habitat Mangrove Leaf plant metagenome US Virgin Islands Plant (saline)
4 organic material marine biome coral reef Turf Algae algae metagenome US Virgin Islands Plant (saline)
5 organic material marine biome animal-associated habitat coral coral metagenome Aruba Animal (saline)
6 organic material marine biome animal-associated habitat hydrozoans hydrozoan metagenome Aruba Animal (saline)
7 organic material marine biome animal-associated habitat coral coral metagenome US Virgin Islands Animal (saline)
8 organic material marine biome animal-associated habitat sponge sponge metagenome US Virgin Islands Animal (saline)
9 organic material marine biome animal-associated habitat sponge sponge metagenome US Virgin Islands Animal (saline)
10 organic material marine biome animal-associated habitat coral coral metagenome Aruba Animal (saline)
11 organic material marine biome coral reef Turf Algae algae metagenome US Virgin Islands Plant (saline)
12 organic material marine biome animal-associated habitat sponge sponge metagenome US Virgin Islands Animal (saline)
13 organic material marine biome animal-associated habitat coral coral metagenome US Virgin Islands Animal (saline)
14 organic material marine biome anthrogenic environmental feature Boat Hull metagenome US Virgin Islands Aqueous (saline)
15 organic material marine biome animal-associated habitat sponge sponge metagenome US Virgin Islands Animal (saline)
16 organic material marine biome animal-associated habitat coral coral metagenome US Virgin Islands Animal (saline)
17 organic material marine biome animal-associated habitat coral coral metagenome US Virgin Islands Animal (saline)
18 anthropogenic environmental material urban biome research facility control swab metagenome US Virgin Islands Solid (non-saline)
19 anthropogenic environmental material urban biome research facility control swab metagenome US Virgin Islands Solid (non-saline)
20 anthropogenic environmental material urban biome research facility control swab metagenome US Virgin Islands Solid (non-saline)
21 organic material marine biome plant-associated habitat Mangrove Leaf plant metagenome US Virgin Islands Plant (saline)
22 organic material marine biome animal-associated habitat coral coral metagenome US Virgin Islands Animal (saline)
23 organic material marine biome animal-associated habitat coral coral metagenome US Virgin Islands Animal (saline)
24 organic material marine biome coral reef Turf Algae algae metagenome Aruba Plant (saline)
25 organic material marine biome animal-associated habitat coral coral metagenome Aruba Animal (saline)
26 organic material marine biome animal-associated habitat sponge sponge metagenome US Virgin Islands Animal (saline)
)tbl";

inline constexpr std::string_view kHuntington2005 = R"tbl( Date  Lake_Temp_C  Lake_Turb_NTRU  WaveHt_Ft  LL_PreDay  AirportRain48W_in
2005-05-25         13.3            58.0       1.00     -0.099                0.0
2005-05-26         14.4            11.5       1.00     -0.256                0.0
2005-05-31         17.8             3.2       0.00      0.027                0.1
2005-06-01         17.8             3.5       0.50      0.045                0.0
2005-06-02         17.2             8.4       1.00     -0.062                0.0
2005-06-06         18.3             7.1       0.33      0.184                0.1
2005-06-07         20.0             9.3       0.50     -0.328                0.1
2005-06-08         20.0             3.0       0.00      0.108                0.0
2005-06-09         23.3             1.9       0.00      0.026                0.0
2005-06-13         24.4             2.9       0.00      0.079                0.1
2005-06-14         21.7             5.2       1.00     -0.069                0.3
2005-06-15         21.1            18.5       1.00     -0.148                1.1
2005-06-16         20.0            54.5       1.50      0.184                1.3
2005-06-20         22.2            32.5       0.50     -0.217                0.0
2005-06-21         21.7            26.0       0.50     -0.029                0.0
2005-06-22         22.8            23.0       0.50      0.029                0.2
2005-06-23         22.8            25.5       0.50      0.027                0.1
2005-06-27         24.4             9.8       0.00     -0.075                0.0
2005-06-28         23.9             4.2       0.00      0.049                0.0
2005-06-29         24.4             7.0       0.50      0.072                0.3
2005-06-30         24.4             3.6       0.00     -0.144                0.3
2005-07-05         24.4             6.2       1.00      0.069                0.0
2005-07-06         23.3            16.0       1.50      0.036                0.0
2005-07-07         24.4            12.0       1.00     -0.099                0.0
2005-07-11         24.4             3.8       0.50      0.004                0.0
2005-07-12         24.4             3.0       0.50     -0.073                0.0
2005-07-13         25.6             4.7       0.50     -0.009                0.0
2005-07-14         24.4             4.4       0.50      0.006                0.1
2005-07-18         25.0             4.4       0.50     -0.014                0.2
2005-07-19         24.4             4.3       0.50      0.050                0.4
2005-07-20         26.1             1.7       0.50      0.013                0.2
2005-07-21         23.9             6.1       0.50     -0.138                1.5
2005-07-25         25.6             8.3       0.50     -0.053                0.5
2005-07-26         25.6             2.3       0.50     -0.236                0.3
2005-07-27         24.4            62.5       5.00      0.857                2.9
2005-07-28         22.2            14.7       2.00     -0.584                1.9
2005-08-01         26.1             4.7       0.00     -0.003                0.0
2005-08-02         26.7             3.0       0.50     -0.053                0.0
2005-08-03         27.2             2.0       0.00      0.007                0.0
2005-08-04         26.1             1.6       0.50     -0.089                0.0
2005-08-08         26.7             1.7       1.00     -0.052                0.0
2005-08-09         26.7             1.5       0.00     -0.138                0.0
2005-08-10         26.1             1.9       0.00      0.023                0.0
2005-08-11         26.1             8.0       2.00      0.253                0.3
2005-08-15         25.6            13.5       2.00      0.062                0.3
2005-08-16         24.4             4.8       0.33     -0.095                0.0
2005-08-17         25.6             2.3       0.17     -0.118                0.0
2005-08-18         25.0             2.3       0.66     -0.040                0.0
2005-08-22         24.4            86.5       3.00      0.076                3.6
2005-08-23         24.4            28.5       4.00      0.023                0.1
2005-08-24         24.4            10.2       2.50     -0.050                0.1
2005-08-25         24.4            10.0       2.00     -0.032                0.0
2005-08-29         23.3             2.7       0.50     -0.282                1.2
2005-08-30         23.3             2.4       0.50      0.207                0.0
2005-09-01         22.8            52.0       2.33     -0.167                2.2
2005-09-06         21.7            21.5       1.00     -0.229                0.0
)tbl";

inline constexpr std::string_view kHuntington2006 = R"tbl(  Date  Lake_Temp_C  Lake_Turb_NTRU  WaveHt_Ft  LL_PreDay  AirportRain48W_in  Ecoli_binary
2006-06-01         20.0             3.9       0.50      0.040                0.7             0
2006-06-05         18.3            21.8       0.50     -0.010                0.2             0
2006-06-06         18.9            10.0       0.00      0.029                0.0             0
2006-06-07         21.1             3.7       0.00      0.030                0.0             0
2006-06-08         20.0            13.5       0.50      0.010                0.0             1
2006-06-12         18.3            41.1       2.50      0.017                0.0             0
2006-06-13         18.3            27.5       1.50     -0.158                0.0             0
2006-06-14         18.9             6.7       0.50     -0.046                0.0             0
2006-06-15         18.9            22.1       1.00     -0.003                0.0             0
2006-06-19         20.0            11.9       0.50      0.217                1.6             1
2006-06-20         20.6             7.3       1.00      0.092                1.9             0
2006-06-21         21.7             3.8       0.00     -0.325                0.6             0
2006-06-22         21.1            17.2       0.00      0.203                4.6             1
2006-06-23         20.0             5.6       0.00      0.105                3.7             0
2006-06-24         21.1            35.0       2.50     -0.062                0.8             1
2006-06-25         22.8             9.8       0.00      0.148                0.1             1
2006-06-26         21.1            11.2       0.50     -0.017                0.0             0
2006-06-27         21.1            14.5       0.00      0.105                0.7             1
2006-07-01         22.8             5.0       0.00     -0.053                0.0             0
2006-07-02         22.8             5.0       0.00     -0.269                0.0             0
2006-07-03         23.3             5.9       0.50      0.158                0.2             0
2006-07-04         21.7             9.1       0.00      0.095                1.1             0
2006-07-05         21.1            57.5       2.50      0.128                0.6             1
2006-07-11         23.9             7.6       0.50      0.214                0.2             1
2006-07-12         22.8             4.7       0.00     -0.161                1.3             1
2006-07-13         22.2            16.7       1.00      0.272                0.8             1
2006-07-14         22.8             4.2       0.50     -0.085                0.1             0
2006-07-15         23.3            19.4       0.00      0.065                1.0             1
2006-07-16         23.9             4.0       0.00     -0.121                0.5             0
2006-07-18         26.1             5.8       0.50     -0.174                0.0             1
2006-07-22         25.6            23.1       3.00      0.180                0.6             1
2006-07-24         25.6             5.1       0.00     -0.124                0.1             0
2006-07-25         25.0             3.8       0.50     -0.142                0.0             0
2006-07-26         25.6             2.9       0.00      0.119                0.6             0
2006-07-27         24.4             4.4       0.50      0.101                1.1             1
2006-07-28         24.4             9.9       1.00      0.315                2.7             1
2006-07-29         26.1             2.5       0.00     -0.246                1.1             0
2006-07-30         26.7             4.4       0.00      0.063                0.0             0
2006-07-31         26.7             2.7       0.00     -0.112                0.9             0
2006-08-01         27.2             2.0       0.00     -0.023                0.5             0
2006-08-02         27.2             3.2       0.00      0.026                0.0             0
2006-08-03         26.7             7.8       0.50      0.296                0.0             1
2006-08-04         25.6            40.6       3.50     -0.122                0.2             1
2006-08-05         26.1            40.1       3.00     -0.003                0.1             1
2006-08-06         25.6            13.3       0.67     -0.141                0.0             0
2006-08-07         26.7             4.5       0.00     -0.125                0.1             0
2006-08-14         25.0             6.8       0.00     -0.157                0.0             0
2006-08-15         26.1            28.8       2.50      0.101                0.3             1
2006-08-16         25.0             6.9       0.50      0.020                0.1             0
2006-08-17         26.1             5.3       0.33      0.000                0.0             0
2006-08-18         25.6             6.8       0.00     -0.072                0.0             0
2006-08-19         24.4             3.5       0.00      0.062                0.4             0
2006-08-20         23.9            29.8       2.50      0.013                0.5             1
2006-08-21         23.3            32.9       1.50     -0.105                0.1             0
2006-08-22         25.0             9.0       0.00     -0.009                0.0             0
2006-08-23         25.0             6.2       0.50      0.085                0.0             0
2006-08-24         24.4             5.9       0.00      0.006                0.0             0
2006-08-28         24.4            32.2       1.50      0.069                0.4             0
2006-08-29         24.4           258.0       5.00      0.640                2.6             1
2006-08-30         23.3           162.8       2.50     -0.558                1.4             1
2006-08-31         23.3            83.0       4.00      0.229                0.0             1
)tbl";

} // namespace metaprobe::fixtures
