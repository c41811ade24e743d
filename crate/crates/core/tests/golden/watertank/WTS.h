#ifndef WTS_H
#define WTS_H

#include <systemc.h>
#include "helpers.h"

SC_MODULE(WTS) {
    sc_signal<double> cv;
    sc_signal<bool> cv_r, cv_w;
    sc_event cv_r_done, cv_w_done;
    sc_signal<double> wl;
    sc_signal<bool> wl_r, wl_w;
    sc_event wl_r_done, wl_w_done;
    double v = 0.0;
    Tracked d;
    double y = 0.0;
    double x = 0.0;
    int I_2[1] = {0};
    SigRef IO_2[1];
    SigRef IO_d_2[1];
    int I_3[1] = {0};
    SigRef IO_3[1];
    SigRef IO_d_3[1];

    void io_2(int i) {
        switch(i){
        case 0: {
            wl.write(d);
            wait(SC_ZERO_TIME);
            wl_w_done.notify();
            wait(wl_r_done);
        } break;
        }
    }

    void io_3(int i) {
        switch(i){
        case 0: {
            wl.write(d);
            wait(SC_ZERO_TIME);
            wl_w_done.notify();
            wait(wl_r_done);
        } break;
        }
    }

    void Watertank() {
        v = 1; wait(SC_ZERO_TIME);
        d = 4.5; wait(SC_ZERO_TIME);
        int i_1=1;
        while (i_1<=10) {
            if (v == 1) {
                // code for communication interrupt statement
                int k_2=-1;
                int chan_num_2=sizeof(I_2)/sizeof(I_2[0]);
                for(int i_2=0;i_2<chan_num_2;i_2++){
                    IO_2[i_2]=1;
                }
                wait(SC_ZERO_TIME);
                for(int i_2=0;i_2<400;i_2++){
                    if(N_2()&&N_p_2()&&IO_2[0]&&!IO_d_2[0]){
                        wait(25,SC_MS);
                        d = d + 0.025 * f_2(d,d.at(0.1)); wait(SC_ZERO_TIME);
                    }
                }
                if(!(N_2()&&N_p_2())&&IO_2[0]&&!IO_d_2[0]){
                    for(int i_2=0;i_2<chan_num_2;i_2++){
                        IO_2[i_2]=0;
                    }
                    wait(SC_ZERO_TIME);
                }
                for(int i_2=0;i_2<chan_num_2;i_2++){
                    if(IO_2[i_2]==1&&IO_d_2[i_2]==1){
                        io_2(i_2);
                        k_2=i_2;
                        break;
                    }
                }
                for(int i_2=0;i_2<chan_num_2;i_2++){
                    IO_2[i_2]=0;
                }
                wait(SC_ZERO_TIME);
                if(k_2>-1){
                    switch(k_2){
                    case 0: {
                        // code for input statement
                        cv_r=1;
                        wait(SC_ZERO_TIME);
                        if(!cv_w)
                            wait(cv_w.posedge_event());
                        wait(cv_w_done);
                        v=cv.read();
                        wait(SC_ZERO_TIME);
                        cv_r_done.notify();
                        cv_r=0;
                        wait(SC_ZERO_TIME);
                    } break;
                    };
                }
                if(N_2()&&N_p_2()&&IO_2[0]&&!IO_d_2[0]){
                    return;
                }
            }
            if (v == 0) {
                // code for communication interrupt statement
                int k_3=-1;
                int chan_num_3=sizeof(I_3)/sizeof(I_3[0]);
                for(int i_3=0;i_3<chan_num_3;i_3++){
                    IO_3[i_3]=1;
                }
                wait(SC_ZERO_TIME);
                for(int i_3=0;i_3<400;i_3++){
                    if(N_3()&&N_p_3()&&IO_3[0]&&!IO_d_3[0]){
                        wait(25,SC_MS);
                        d = d + 0.025 * f_3(d,d.at(0.1)); wait(SC_ZERO_TIME);
                    }
                }
                if(!(N_3()&&N_p_3())&&IO_3[0]&&!IO_d_3[0]){
                    for(int i_3=0;i_3<chan_num_3;i_3++){
                        IO_3[i_3]=0;
                    }
                    wait(SC_ZERO_TIME);
                }
                for(int i_3=0;i_3<chan_num_3;i_3++){
                    if(IO_3[i_3]==1&&IO_d_3[i_3]==1){
                        io_3(i_3);
                        k_3=i_3;
                        break;
                    }
                }
                for(int i_3=0;i_3<chan_num_3;i_3++){
                    IO_3[i_3]=0;
                }
                wait(SC_ZERO_TIME);
                if(k_3>-1){
                    switch(k_3){
                    case 0: {
                        // code for input statement
                        cv_r=1;
                        wait(SC_ZERO_TIME);
                        if(!cv_w)
                            wait(cv_w.posedge_event());
                        wait(cv_w_done);
                        v=cv.read();
                        wait(SC_ZERO_TIME);
                        cv_r_done.notify();
                        cv_r=0;
                        wait(SC_ZERO_TIME);
                    } break;
                    };
                }
                if(N_3()&&N_p_3()&&IO_3[0]&&!IO_d_3[0]){
                    return;
                }
            }
            i_1++;
        }
    }

    void Controller() {
        y = 1; wait(SC_ZERO_TIME);
        x = 4.5; wait(SC_ZERO_TIME);
        int i_4=1;
        while (i_4<=10) {
            wait(1000, SC_MS);
            // code for input statement
            wl_r=1;
            wait(SC_ZERO_TIME);
            if(!wl_w)
                wait(wl_w.posedge_event());
            wait(wl_w_done);
            x=wl.read();
            wait(SC_ZERO_TIME);
            wl_r_done.notify();
            wl_r=0;
            wait(SC_ZERO_TIME);
            if (x >= 5.9) {
                y = 0; wait(SC_ZERO_TIME);
            }
            if (x <= 4.1) {
                y = 1; wait(SC_ZERO_TIME);
            }
            // code for output statement
            cv_w=1;
            wait(SC_ZERO_TIME);
            if(!cv_r)
                wait(cv_r.posedge_event());
            cv.write(y);
            wait(SC_ZERO_TIME);
            cv_w_done.notify();
            wait(cv_r_done);
            cv_w=0;
            wait(SC_ZERO_TIME);
            i_4++;
        }
    }

    SC_CTOR(WTS) {
        IO_2[0].bind(wl_w);
        IO_d_2[0].bind(wl_r);
        IO_3[0].bind(wl_w);
        IO_d_3[0].bind(wl_r);
        SC_THREAD(Watertank);
        SC_THREAD(Controller);
    }
};

#endif
