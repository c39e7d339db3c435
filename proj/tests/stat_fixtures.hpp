#pragma once

#include <vector>

namespace dwellopt::testing {

struct PairedFixture {
  std::vector<double> a, b;
  double statistic, p_value;
};

struct NormalityFixture {
  std::vector<double> x;
  double w, p_value;
};

// Reference values from scipy.stats.wilcoxon (normal approximation, zero
// differences dropped, continuity correction) and scipy.stats.shapiro.
inline const std::vector<PairedFixture>& paired_fixtures() {
  static const std::vector<PairedFixture> f{
    {{125.0, 115.0, 130.0, 140.0, 140.0, 115.0, 140.0, 125.0, 140.0, 135.0}, {110.0, 122.0, 125.0, 120.0, 140.0, 124.0, 123.0, 137.0, 135.0, 145.0}, 18.0, 0.6352893188352069},
    {{9.6, 9.0, 10.3, 6.4, 10.6, 9.4, 8.5, 10.2, 6.1, 9.7, 8.5, 10.8, 10.9, 8.1, 8.1, 7.1, 8.4, 10.6, 11.7, 10.5, 10.1, 8.3, 10.4, 8.4, 10.5, 9.6, 11.7, 10.4, 12.7, 9.2}, {10.9, 9.7, 12.5, 4.9, 12.0, 8.9, 8.1, 10.7, 5.1, 9.0, 8.5, 11.0, 9.5, 7.7, 8.5, 7.5, 8.2, 11.1, 11.7, 12.2, 9.8, 8.9, 10.4, 9.8, 10.0, 11.0, 11.0, 9.5, 12.7, 9.8}, 144.5, 0.43803585404796586},
    {{4.0, 0.0, 2.0, 3.0, 0.0, 2.0, 2.0, 1.0, 1.0, 3.0, 3.0, 2.0, 3.0, 3.0, 3.0, 4.0, 1.0, 1.0, 2.0, 3.0, 4.0, 1.0, 0.0, 2.0, 4.0}, {1.0, 3.0, 2.0, 3.0, 3.0, 0.0, 2.0, 2.0, 4.0, 2.0, 0.0, 3.0, 1.0, 4.0, 0.0, 3.0, 0.0, 1.0, 2.0, 3.0, 2.0, 3.0, 2.0, 1.0, 1.0}, 80.0, 0.5542073341529065},
    {{0.3949064774378438, 1.9312068474400939, -0.9977568753677936, 1.1551673162548703, 1.0815576939107636, -1.1200802383514654, 0.1902346053615725, 0.5240390963859574, -0.9108560639633887, 1.079217769211546, 0.8779097900984013, 1.698437695911691, 0.38983442136617874, 0.9460304564262813, 1.8121165247471582, 0.20299055190558077, -0.5002227898590546, -1.450914320783902, 0.2864548014439108, -1.2672165371800261, 1.0976933587930149, 0.14716505891727408, 0.8110572665632209, 0.16271351725088673, 1.2383313599650503, -0.456354677083108, 0.05006772266326947, 1.4001149565290263, -1.2583110321903825, 0.19252723035005864, 0.9752574099039509, -1.0635333890782235, -0.6997189554259344, -1.2499109994493884, 1.180755855958985, -0.18937950941760334, -0.3151526950576845, -1.4125440998120293, -1.0637880888392612, 0.9265324028169399}, {0.11053374408531749, -0.10088652953619592, 1.0918978444233292, -0.6058702327124592, 1.9133774967039865, -0.06821453798861687, -0.2130431413146951, 0.0348348677382167, 0.33734160322850226, 1.0011685358520779, -0.3988357023991144, -0.5240273035749163, 0.3381573181438341, 0.638946480595799, 1.1772554573332024, -0.17675317335829227, 1.267011711446446, -0.7198929249926405, 1.6857781904896354, -0.7920718843489276, 0.2137357829776387, 0.49529433290442093, 1.313168409695103, 1.760167546575992, 0.34923105494836043, 2.1956444686047454, -0.5195254055421561, 0.627085780475411, 0.06309937977887972, 0.8724267033297068, -0.6518576569589676, -0.7978371256871217, 1.5831606687353896, 1.3640303528956363, 0.8611182293510113, -0.4022128648311302, 0.8920709367367252, 0.7471575516345992, 1.533463002510945, 0.5329162808479677}, 316.0, 0.20884008404294307},
    {{1.0, 1.0, 0.0, 2.0, 1.0, 3.0, 3.0, 6.0, 4.0, 1.0, 1.0, 1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 5.0, 1.0, 1.0, 8.0, 2.0}, {0.0, 3.0, 5.0, 1.0, 8.0, 1.0, 2.0, 1.0, 3.0, 1.0, 3.0, 5.0, 7.0, 7.0, 3.0, 5.0, 3.0, 2.0, 2.0, 0.0, 3.0, 3.0}, 77.0, 0.3012783937260922},
  };
  return f;
}

inline const std::vector<NormalityFixture>& normality_fixtures() {
  static const std::vector<NormalityFixture> f{
    {{6.266962896642038, 1.8025119567466756, 5.733287453278377, 3.128277980085855, 0.5502024009975299, 7.319946525491394, 2.028804033294371, 4.368920276083405, 7.497941800048624, 6.406036966767116, 4.875901279183071, 3.224276058935254, 5.592245293890525, 4.86345890608774, 6.642810475962746, 5.776495353273262, 6.458241980056343, 1.9927680924679336, 3.2818727751175523, 5.319417516442648, 5.737763911940852, 3.751491948547528, 3.596359370041367, 4.945846508352556, 5.249846682876096, 8.928044936000523, 4.232100553120095, 6.074928210240155, 1.5743429851168016, 4.799200843693258}, 0.9810493519859987, 0.8527219476570428},
    {{-0.32124156177765695, -1.2884422140339447, -0.9706107733530734, -0.645344254451187, -0.7819498769887497, -1.8978734842594804, -0.32371034455099806, -0.09892637966939825, -0.3061516201188416, 0.8143385780887049, -0.17103626392813376, 0.09928257456339362, -0.03590167573689501, 0.11688604904624468, -1.059698555864337, -0.28704239066016546, 1.7920603835063502, 0.3263675799066463, -0.16389169423044558, -0.45005920295810453, 8.378370171119103, 8.005672209793635, 8.216305854509795, 8.875159110087639, 8.144387939309942, 7.909877184942621, 7.386261864532694, 6.674127633311831, 8.426740501731127, 8.358125448041257, 7.340155957870055, 7.441383006340218, 6.906594525193138, 7.010580385501004, 7.652021117933575, 7.939879572498735, 8.87321740756657, 8.561330399643527, 7.454219455450701, 8.809752823874208}, 0.7743171667771312, 2.059346677225144e-06},
    {{0.6080246834680448, 1.256466120133541, 2.322202807813787, 1.6658855263483283, 1.145908579847646, 0.4947504669639146, 0.20916484683202513, 0.6985556255679031, 1.4623399414061695, 0.0754917297921144, 0.9074432695841204, 1.0272814597325763, 0.32932100217285026, 0.15954896977599708, 0.04864402564522603}, 0.9360878459962126, 0.33571462058722157},
    {{0.6018789886478307, 0.5418981356732899, 0.3198276808566072, 0.4123950773032189, 0.45664078109487416, 0.4365813823072622, 0.4313015877492351, 0.9654728618769695}, 0.8037432166605833, 0.03138772440172992},
    {{0.04, 0.84, -0.66, 1.29, 0.42, 0.07, -0.63, -2.86, 0.32, 0.0, -0.12, -0.4, 1.88, -0.09, -0.08, -0.0, -1.07, -0.54, -0.34, 0.32, 0.6, -0.76, 1.06, -2.39, 1.51, 0.66, 0.83, 0.14, 0.41, 0.33, -0.35, -0.91, 0.42, 0.27, -0.67, 0.06, -0.73, 2.39, 0.55, 0.65, 0.91, -3.51, 0.03, 1.12, -1.11, 0.36, 0.6, -1.24, 3.12, 0.11, -0.03, 0.07, 1.31, 2.63, -0.41, -1.76, 0.66, 0.28, 1.36, -1.37}, 0.9602335204525889, 0.048302757254260954},
    {{1.0, 2.0, 4.0}, 0.9642857142857142, 0.6368868450289689},
    {{-0.2877477929072851, 0.034168168276333837, -0.18983380707780298, -0.35231560894404995, -0.4655750303193851, 1.6873356952220906, -0.3334084010618195, 1.1717630787439162, -0.10271425189337355, 0.6517067711143697, 1.1903453942827016, 0.5480548975517863, -2.1434986293662597, -1.1362043593384192, -0.6581376512596158, 0.6251693749202027, -0.8214986360236015, -0.9555538836936872, 1.3227569195784437, 2.1311133325935536, -1.0386135448356755, -0.28046377850947524, 0.0741345697219151, -1.1550182575302286, -0.5231303263947871, -1.6988151851793836, 0.3817841711715247, -0.288948541063472, -1.3744064760492356, -2.2668010429896075, 1.2188191129164312, -0.015656240361372562, -2.3249052238154513, 0.04970061712145258, 2.1458166725145875, -0.05830645086955183, 1.175024088926406, -1.442665154894129, 1.1084182614977292, -1.4273619913611308, 0.5892866861788569, -0.39820214041307167, 0.29856861006210816, 0.7230572681338514, -0.8260443933798314, -1.384272122184641, 1.7708670099547548, 0.7229096596022723, 0.5583288557892596, 0.0788125192330473, 2.2028977360738935, 0.8416008660288341, -1.9588817991948162, -0.08403270503775145, 0.08769481219610217, -2.4373408452805316, -1.4782396139268308, 0.9143373236182675, -0.4506184719290253, 1.2255519972760955, -0.5886662200312285, -1.467574888314733, 2.7471050624777757, 0.6776004357824864, -0.30727916934570954, 1.1595791204441726, -0.09793200017153705, -0.8722054768995258, 0.7102859035362799, 0.2682706685543163, -0.7477720513270173, 0.1286750576649576, -0.63966069228709, 1.8463050923214834, 0.6641464550228243, -0.12865935599696635, -0.7969071986155235, -1.008259526705002, 1.589798800251036, -0.15217047042949908, 1.0515330762319848, 0.8840682119737453, 2.0917797295584464, 0.11715532732652921, -0.1729934179638777, -0.15940663803697472, -0.4704786457234781, 0.6508057481714078, 0.7809201080379603, 0.9719359506373897, -3.4053847151066035, -0.7222181491447187, -0.5754293259633901, -0.801543622382102, 1.180527854116007, -0.5269714457639232, -0.8581412199886466, 0.3139268150160759, -0.48409284919272894, 0.0061313899103541845, -0.720446764711613, -0.8696801680579475, 0.6564709608410174, -0.022339617508607634, -0.6541700106237732, -0.13621799324421896, 0.14790193779912972, -1.3667157590670191, 0.26338794972704194, 0.5599802114685714, -0.6185227187546778, 0.24273838810991594, -1.9839658293538083, -0.5432267828005427, 0.6338631474688391, -0.3430455561880355, 1.0209161067963075, 0.1150673643902084, 0.16312896620944084, -1.984321106469849, -1.486958300820829, -0.33639619946860794, -0.1132036328287245, 1.0366221559265607, -0.01957239823002229, 1.0583382189326487, -1.2365879756410714, 1.959669082161169, -0.5630810578203775, -0.9667765197004513, -1.158187391050278, -1.5965227405316562, 0.32302675746185316, -0.6440609262808971, -1.1295175231067678, -0.4325223175458727, -0.7127244461209921, 1.3656659831014248, -0.3996056716276949, 0.18626225283642683, -0.44635400694772853, 1.4232662434934897, -0.5404584457304505, -0.3896833497028773, -1.282432149147221, 0.2703074183037089, 0.16297157006605886, 1.3752517002162237, 1.3564722138546093, 2.3047481492667248, 0.49313888898612507, 0.5253316977391892, -0.25996478273581564, 0.32432529432083934, -0.7753163268208114, -0.20014619023419739, -0.015089272075987894, 0.6798344200221411, 0.9236306237869328, -1.1304622438101035, -0.9166526992532559, -0.2912395948798767, -0.41102736344046775, -0.403743089975557, -1.506159208204592, -0.07390308240362296, -0.5420735781627288, 0.20073324968580322, 0.14363897199479517, -0.9655284030860602, 0.4010377808981736, 0.45453277431371214, -1.5712372405523714, 0.6161918855471679, -0.41226387314205154, 0.15500387613743302, 0.030292793447924838, -0.48326680143455153, -1.7817979965277608, 0.040481915129365796, -0.5753526872531414, -0.2756691627221759, 1.4225047982299701, -1.4494943818195962, -0.5793030595426344, 0.7060589528564932, -0.7194093082191106, 1.6966061249244426, 1.524602423669088, -1.7304427858285076, 1.897717798923225, -0.4524243231449633, -0.22256596655440086, 2.256662077733366, 2.2880580626024245, -0.18775377932062712, -0.8915483702855096, 0.06454549214999998, 0.9569884973649232, -0.6737658718727945, 0.5171121081114038, 0.09990043321104222, -0.028633953445274293, 1.002110862055228, -1.4687153361465108, -1.342940838931093, -0.7036972032251112, 0.8341540632675944, 0.6626102922679525, -0.17282535102548563, 0.6059537067839746, -1.2742714288210095, -0.5835881571291308, 0.668819784740747, 1.5008191544147969, -0.5140201116367369, 0.00205405331088595, -0.9436152103065896, -0.6500236335755114, 0.21695166123526777, 0.5616606601694887, -1.0370728919049021, -0.30595402482785167, 0.6534659330945762, 1.2741199599552924, -1.27879114629859, -0.4064221217762113, -0.258190880052795, -0.24907684720732354, 0.24630239323429987, -0.39568422568732436, 0.18882590957291476, 1.2886171561527144, 1.282189368764335, -0.4989000535057594, -0.19480229226709952, 0.5635307969815947, -0.40216940916632676, -0.5251255386482244, -0.9464917873605595, -0.5840555472328262, -0.9465571680454379, -0.8360669691790782, -0.6741152667020991, -0.13512810871630251, 1.765405302991327, 1.6163499341349006, 0.35328607197127737, 0.40651433544644733, 0.6598650092302748, -0.053931786446284345, -0.30697384834094055, 1.4119730199305565, -1.3986363770684853, 1.1920225588458475, -0.9010653814956165, -1.6912126647736563, 0.6968322784724564, -0.8383433867017928, -2.5704916284707724, 0.39577178568493077, 0.38388116950851003, -0.10218298052176666, 0.7920206686434038, -1.1156088145977152, 0.08773887302157715, 1.3157600104557354, 0.12628961302619487, -0.11064685442231861, -0.7284089270805458, -0.16799314259173212, 0.21922503501137755, -0.7793482128023351, -0.4541686431451968, -0.494372634215658, -0.04294139402523082, 0.5909606113176373, 0.15098069930253535, 0.8235376733538392, -0.20522092631184458, 0.5792781417768755, -0.09147006412087806, -0.8889751173905616, -1.1621584125599969, -1.6967954596197479, 1.7388874868243276, -1.5127665244006918, -1.288844694379529, -1.3255523777606109, 0.2911769893825501, 0.8102890200018186, 0.05757938210737478, 1.6353123508014094, 0.07467845102723963, 0.20285031045990382, 0.20349776191921748, -0.45793057316957525, -0.07989687285706257, 0.7865624302078057, -0.8014161344677627}, 0.9957305784621668, 0.5880110881909996},
  };
  return f;
}

}  // namespace dwellopt::testing
