"""Embedded spherical design tables.

Unit vectors whose equal-weight average integrates every polynomial of
degree <= ``t`` over the unit sphere exactly (up to rounding).
"""
import numpy as np

# 25 points, strength t = 5 (no 25-point 6-design exists); moments verified to 1e-15.
DESIGN_25_T5 = np.array([
    [-0.41223565241848864, -0.8834143423903694, -0.22280230370015072],
    [0.755760717672924, 0.5474623624428939, 0.3593197730865255],
    [-0.17178846161985445, -0.6850545548701419, 0.70794701871394],
    [0.9192352589914998, 0.0061761805689936, -0.3936602512578701],
    [-0.49396429675017994, 0.8607573473913134, 0.12286603455784706],
    [-0.7319639673946328, -0.28716865352616894, -0.6178696584781259],
    [-0.04473012679789378, -0.5410470796605431, -0.8398019250677163],
    [0.7842727807344291, -0.41961718711366824, -0.45698755090034876],
    [0.2803922274216381, 0.42181220472570935, -0.8622381705456843],
    [0.21501141073316427, -0.9310349196143091, 0.29486280150828037],
    [-0.8223064216415187, -0.1599768130392754, 0.5460948344536118],
    [0.34379457921215706, -0.8712354398977151, -0.35036280563234856],
    [-0.7712970185388563, -0.6245501385987042, 0.12262966023524043],
    [-0.34938295698364785, 0.5509069494624368, 0.7579136378264708],
    [-0.8654799115912881, 0.19181878234711894, -0.4627635220831529],
    [0.04532340254015584, -0.021299403494426224, -0.9987452751292317],
    [0.24804694579472608, 0.2653773922587865, 0.931690695649492],
    [-0.47497581492169205, 0.6176753280558737, -0.6267975465415794],
    [-0.10244271852871169, -0.20001065009126842, 0.9744235369029811],
    [0.2078790676986652, 0.8985489349568961, 0.38651792287106357],
    [0.7246072719317133, 0.6229734541543146, -0.294700486736487],
    [0.05349498263073612, 0.9370269049092215, -0.3451360113195699],
    [0.8390547447876274, -0.0949807931273938, 0.5356918742955326],
    [-0.908287256961189, 0.3097721690098996, 0.2811680318756409],
    [0.7319812139985172, -0.5109180348594742, 0.4507396854156398],
])

TABLES = {25: (5, DESIGN_25_T5)}
